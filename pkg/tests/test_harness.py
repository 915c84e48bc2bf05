import json

import numpy as np
import pytest
import yaml

from nczlab.filtration import build_dyadic
from nczlab.harness import (PROFILES, SECTIONS, ConfigError, SuiteConfig, generate_test_function, lambda_floor,
                            reference_measure, run_suite, scalar_oracle_report, suite_members)
from nczlab.operator_space import bochner_lp_norm

SMALL = {"members": 12, "scalar_oracle": {"members": 5}, "nondoubling": {"members": 3, "J": 6}}


@pytest.mark.parametrize("profile", PROFILES)
@pytest.mark.parametrize("d", [1, 2])
def test_profiles_are_psd_and_normalized(profile, d):
    f = generate_test_function(9, d, 3, 4, profile)
    assert np.linalg.eigvalsh(f.values).min() >= -1e-12
    assert bochner_lp_norm(f, 1) == pytest.approx(1.0, rel=1e-12)


def test_generator_is_bitwise_deterministic():
    a = generate_test_function(5, 2, 3, 4, "spiky-psd")
    b = generate_test_function(5, 2, 3, 4, "spiky-psd")
    c = generate_test_function(6, 2, 3, 4, "spiky-psd")
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != c.values.tobytes()
    with pytest.raises(ValueError):
        generate_test_function(5, 1, 3, 2, "unknown")


def test_reference_measures_are_finite():
    for name in ("lebesgue", "cubic", "two-bump"):
        mu = reference_measure(name, 6)
        assert mu.domain.total_measure > 0
    with pytest.raises(ValueError):
        reference_measure("nope", 4)


def test_suite_members_cover_the_grid():
    members = suite_members(SuiteConfig.from_dict({"members": 200}))
    assert len(members) == 200
    assert {m["d"] for m in members} == {1, 2}
    assert {m["m"] for m in members} == {1, 2, 4, 8}
    assert max(m["J"] for m in members) <= 4


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        SuiteConfig.from_dict({"memberz": 3})
    with pytest.raises(ConfigError):
        SuiteConfig.from_dict({"weak11": {"J": "ten"}})
    with pytest.raises(ConfigError):
        SuiteConfig.from_dict({"lambda": {"values": [0.5]}})
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"seed": 3, "members": 7}))
    cfg = SuiteConfig.from_yaml(path)
    assert cfg["seed"] == 3 and cfg["members"] == 7
    assert yaml.safe_load(cfg.to_yaml())["members"] == 7
    with pytest.raises(ConfigError):
        run_suite(SuiteConfig.from_dict({}), only=["nonsense"])


def test_suite_is_deterministic_apart_from_wall_time():
    only = ["cuculescu", "czlemmas", "identities", "zeta", "scalar-oracle"]
    a = run_suite(SMALL, only)
    b = run_suite(SMALL, only)
    assert a.passed
    assert a.to_json(include_wall_time=False) == b.to_json(include_wall_time=False)
    assert "wall_time" in json.loads(a.to_json())


def test_only_filter_restricts_sections():
    rep = run_suite(SMALL, ["scalar-oracle"])
    assert {r["section"] for r in rep.records} == {"scalar-oracle"}
    assert all(r["anchor"] for r in rep.records)


def test_zero_tolerance_produces_failures():
    cfg = dict(SMALL, tolerances={"reconstruction": 0.0, "vanishing": 0.0})
    rep = run_suite(cfg, ["czlemmas", "identities"])
    assert not rep.passed
    bad = rep.failures[0]
    assert bad["defect"] > 0 and bad["seed"] is not None


def test_report_outputs(tmp_path):
    rep = run_suite(SMALL, ["kernels"])
    paths = rep.write(tmp_path, svg=True)
    names = {p.name for p in paths}
    assert {"report.json", "report.csv"} <= names
    header = (tmp_path / "report.csv").read_text().splitlines()[0]
    assert header == "section,member,seed,check,anchor,passed,value,bound,defect"


def test_scalar_oracle_report_passes(rng):
    filt = build_dyadic(1, 5)
    f = generate_test_function(1, 1, 5, 1, "spiky-psd", domain=filt.domain)
    assert scalar_oracle_report(f, 2 * lambda_floor(f, filt), filt).passed


def test_sections_constant():
    assert SECTIONS[0] == "cuculescu" and "group" in SECTIONS

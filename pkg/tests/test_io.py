import json

import numpy as np
import pytest

from nczlab import io as nio
from nczlab.cuculescu import run_cuculescu
from nczlab.cz_decompose import decompose_nonregular
from nczlab.filtration import build_dyadic, build_nondoubling_filtration_1d, verify_nested
from nczlab.harness import generate_test_function, reference_measure

from conftest import top_mean


def test_array_round_trip(rng):
    a = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
    assert np.array_equal(nio.decode_array(json.loads(json.dumps(nio.encode_array(a)))), a)
    with pytest.raises(nio.FormatError):
        nio.decode_array({"shape": [2, 2], "data": [0.0] * 6})


def test_function_round_trip(tmp_path):
    f = generate_test_function(4, 2, 3, 3, "spiky-psd")
    path = tmp_path / "f.json"
    nio.dump(f, path)
    g = nio.load(path)
    assert g.domain.same_as(f.domain)
    assert np.array_equal(g.values, f.values) and g.hermitian == f.hermitian


@pytest.mark.parametrize("make", [lambda: build_dyadic(2, 2, np.arange(1, 17) / 136.0),
                                  lambda: build_nondoubling_filtration_1d(reference_measure("two-bump", 6))])
def test_filtration_round_trip(make, tmp_path):
    filt = make()
    nio.dump(filt, tmp_path / "filt.json")
    back = nio.load(tmp_path / "filt.json")
    assert back.J == filt.J and back.is_dyadic == filt.is_dyadic
    for j in range(filt.J + 1):
        assert np.array_equal(back.labels[j], filt.labels[j])
        assert np.allclose(back.atom_measures(j), filt.atom_measures(j))
    assert verify_nested(back).passed


def test_sequence_and_parts_round_trip(tmp_path):
    filt = build_dyadic(1, 4)
    f = generate_test_function(2, 1, 4, 2, "rank-one-bumps", domain=filt.domain)
    lam = 1.5 * top_mean(f, filt)
    seq = run_cuculescu(f, lam, filt)
    parts = decompose_nonregular(f, lam, filt, seq)
    nio.dump(seq, tmp_path / "seq.json")
    nio.dump(parts, tmp_path / "parts.json")
    seq2 = nio.load(tmp_path / "seq.json")
    parts2 = nio.load(tmp_path / "parts.json")
    assert seq2.lam == lam and all(np.array_equal(a, b) for a, b in zip(seq2.xi, seq.xi))
    assert parts2.mode == "nonregular"
    assert np.array_equal(parts2.g.values, parts.g.values)
    assert parts2.reconstruction_defect() == parts.reconstruction_defect()


def test_format_errors(tmp_path):
    filt = build_dyadic(1, 2)
    obj = nio.to_dict(filt)
    with pytest.raises(nio.FormatError):
        nio.from_dict({**obj, "version": 99})
    with pytest.raises(nio.FormatError):
        nio.from_dict({**obj, "format": "other"})
    with pytest.raises(nio.FormatError):
        nio.from_dict({**obj, "kind": "mystery"})
    broken = json.loads(json.dumps(obj))
    broken["levels"][2].pop()
    with pytest.raises(nio.FormatError):
        nio.from_dict(broken)
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(nio.FormatError):
        nio.load(tmp_path / "bad.json")
    with pytest.raises(TypeError):
        nio.to_dict(object())

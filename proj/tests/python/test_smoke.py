import json
import math
import os
import subprocess

import numpy as np
import pytest

import kronfeat


def unit_upper(rng, d):
    m = np.triu(rng.standard_normal((d, d)))
    return m / np.linalg.norm(m)


def test_rbf_exact_matches_numpy():
    rng = np.random.default_rng(0)
    x, y = unit_upper(rng, 4), unit_upper(rng, 4)
    expected = math.exp(-np.sum((x - y) ** 2) / (2 * 0.7**2))
    assert kronfeat.rbf_exact(x, y, 0.7) == pytest.approx(expected, rel=1e-12)


def test_sym_eigh_and_log_match_numpy():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 5))
    spd = a @ a.T + 5 * np.eye(5)
    vals, vecs = kronfeat.sym_eigh(spd)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(spd), rtol=1e-10)
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, spd, atol=1e-10)
    w, v = np.linalg.eigh(spd)
    np.testing.assert_allclose(kronfeat.sym_log(spd, 0.0), v @ np.diag(np.log(w)) @ v.T, atol=1e-10)


def test_sym_eigh_rejects_asymmetric():
    with pytest.raises(kronfeat.ContractError):
        kronfeat.sym_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_descriptor_is_upper_unit_norm():
    rng = np.random.default_rng(2)
    joints = rng.standard_normal((40, 4, 3))
    d = kronfeat.log_cov_descriptor(joints)
    assert d.shape == (9, 9)
    assert np.allclose(np.tril(d, -1), 0.0)
    assert np.linalg.norm(d) == pytest.approx(1.0, abs=1e-9)


def test_descriptor_rejects_single_frame():
    with pytest.raises(kronfeat.Error):
        kronfeat.log_cov_descriptor(np.zeros((1, 3, 3)))


def test_kron_trace_matches_materialized_product():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((3, 3))
    ws = [rng.standard_normal((3, 3)) for _ in range(2)]
    big = np.kron(ws[0], ws[1]).T @ np.kron(x, x)
    assert kronfeat.kron_trace(ws, x) == pytest.approx(np.trace(big), rel=1e-12)


def test_feature_map_seed_determinism_and_shape():
    a = kronfeat.sample_map("kron_pi", 50, 4, seed=9)
    b = kronfeat.sample_map("kron_pi", 50, 4, seed=9)
    x = unit_upper(np.random.default_rng(4), 4)
    assert a.kind == "kron_pi" and a.nu == 50
    np.testing.assert_array_equal(a.apply(x), b.apply(x))
    assert kronfeat.sample_map("fourier", 30, 16).apply_batch([x, x]).shape == (2, 30)


def test_fastfood_rejects_non_multiple():
    with pytest.raises(kronfeat.ContractError, match="16"):
        kronfeat.sample_map("fastfood", 10, 16)


def test_c_rho_series_at_half():
    r = kronfeat.c_rho(0.5)
    assert r["series"] == pytest.approx(2 * math.e**2, rel=1e-9)
    assert not r["diverged"]


def test_linear_svm_on_radial_descriptors():
    xs, ys = kronfeat.radial_descriptors(classes=3, per_class=20, d=4, seed=5)
    fmap = kronfeat.sample_map("fourier", 500, 16, seed=1)
    svm = kronfeat.train_linear_svm(fmap.apply_batch(xs), ys, c=10.0)
    pred = svm.predict(fmap.apply_batch(xs))
    assert np.mean(np.array(pred) == np.array(ys)) > 0.9
    assert svm.classes == sorted(set(ys))


def test_cli_synth_and_sweep_roundtrip(tmp_path):
    cli = os.environ.get("KRONFEAT_CLI")
    if not cli:
        pytest.skip("KRONFEAT_CLI not set")
    manifest = tmp_path / "ds.json"
    subprocess.run([cli, "synth", "--out", str(manifest), "--per-class", "6", "--classes", "3"], check=True)
    report = json.loads(kronfeat.sweep(str(manifest), ["kron_pi"], [10, 20], repetitions=2))
    assert len(report["rows"]) == 4
    assert [a["count"] for a in report["aggregates"]] == [2, 2]

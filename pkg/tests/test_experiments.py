import csv
import io

import numpy as np
import pytest

from l1potts.experiments import (BENCH_COLUMNS, COMPARE_COLUMNS, CONVERGENCE_COLUMNS,
                                 DEFAULT_SUITE, BenchRecord, ConvergenceConfig,
                                 convergence_study, loglog_slope, method_comparison,
                                 runtime_scaling, success_rates, write_csv)


def test_runtime_scaling_small():
    recs = runtime_scaling([64, 128, 256], reps=2)
    assert [(r.n, r.method) for r in recs] == [(n, m) for n in (64, 128, 256)
                                               for m in ("l1potts", "l2potts")]
    assert all(r.seconds > 0 and r.reps == 2 for r in recs)
    assert np.isfinite(loglog_slope(recs, "l1potts"))


def test_runtime_scaling_validation():
    with pytest.raises(ValueError):
        runtime_scaling([128, 64])
    with pytest.raises(ValueError):
        loglog_slope([BenchRecord(64, "l1potts", 0.1, 1)])


def test_loglog_slope_exact():
    recs = [BenchRecord(n, "l1potts", 1e-9 * n ** 2, 1) for n in (256, 512, 1024)]
    assert loglog_slope(recs) == pytest.approx(2.0)


def test_method_comparison_shape_and_determinism():
    rows = method_comparison(seeds=[3], n=64)
    assert len(rows) == len(DEFAULT_SUITE) * 2
    assert {r["method"] for r in rows} == {"l1potts", "l2potts"}
    assert all(set(r) == set(COMPARE_COLUMNS) for r in rows)
    assert rows == method_comparison(seeds=[3], n=64)
    rates = success_rates(rows)
    assert len(rates) == 6 and all(v in (0.0, 1.0) for v in rates.values())


def test_noiseless_comparison_is_exact():
    from l1potts.experiments import NoiseCase
    rows = method_comparison([NoiseCase("none")], seeds=[0], n=128)
    for r in rows:
        assert r["jump_err"] == 0 and r["max_offset"] == 0 and r["l1_err"] == 0.0


def test_convergence_single_level():
    res = convergence_study(1, config=ConvergenceConfig(levels=1, fine_n=384))
    assert len(res.rows) == 1
    assert res.rows[0]["l1_dist_to_finest"] == 0.0
    assert res.rows[0]["potts_value"] >= res.fine_optimum - 1e-12


def test_convergence_rows():
    cfg = ConvergenceConfig(levels=3, fine_n=1536)
    res = convergence_study(3, seed=1, config=cfg)
    assert [r["n"] for r in res.rows] == [16, 32, 64]
    assert res.rows[-1]["l1_dist_to_finest"] == 0.0
    assert res.rows == convergence_study(3, seed=1, config=cfg).rows


def test_write_csv(tmp_path, capsys):
    recs = [BenchRecord(16, "l1potts", 0.5, 3)]
    p = tmp_path / "b.csv"
    write_csv(recs, BENCH_COLUMNS, p)
    assert p.read_text() == "n,method,seconds,reps\n16,l1potts,0.5,3\n"
    write_csv([{"level": 0, "n": 16, "potts_value": 1.0, "l1_dist_to_finest": 0.0}],
              CONVERGENCE_COLUMNS)
    out = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert out[0]["n"] == "16"

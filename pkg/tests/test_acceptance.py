"""Acceptance gate: one test per verification criterion, each printing a
PASS/FAIL line with the measured statistic at its stated tolerance.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines as the
criteria complete.  Settings match the documented desk-scale presets; total
runtime is roughly ten minutes on eight cores.
"""

import json
import os
import time

import numpy as np
import pytest

from shelab import cli
from shelab.grids import SpaceTimeGrid
from shelab.kernel import linear_increment_variance
from shelab.solver import discrete_probe_variance

_THREADS = min(8, os.cpu_count() or 1)


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}", flush=True)


def _run(experiment: str, outdir, **overrides):
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = cli.default_config(experiment)
    cfg["output_dir"] = str(outdir)
    cfg.update(overrides)
    start = time.monotonic()
    results, ok = cli._RUNNERS[experiment](cfg, outdir, _THREADS)
    return results, ok, time.monotonic() - start


@pytest.fixture(scope="module")
def outroot(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def test_kernel_identities(outroot):
    res, ok, wall = _run("kernel-check", outroot / "kernel")
    _report(
        "kernel identities",
        ok,
        f"sym {res['worst_symmetry']:.1e} < 1e-14, mass {res['worst_mass']:.1e}"
        f" < 1e-10, semigroup {res['worst_semigroup']:.1e} < 1e-8,"
        f" series {res['worst_series']:.1e} < 1e-10 ({wall:.0f} s)",
    )
    assert ok and wall < 30


def test_ehm_identity(outroot):
    res, ok, wall = _run("ehm-check", outroot / "ehm")
    worst = max(res[k]["residual"] for k in ("m1", "m2", "m3"))
    _report("Ehm identity", ok, f"worst residual {worst:.1e} < 1e-6 ({wall:.0f} s)")
    assert ok and wall < 60


def test_solver_vs_gaussian_oracle(outroot):
    res, ok, wall = _run(
        "oracle-compare",
        outroot / "oracle",
        replications=4000,
        grid={"n_space": 64, "n_time": 4096, "horizon": 0.25,
              "probe_x": 0.5, "explicit": True},
    )
    worst = max(res["rel_errors"])
    # refinement: the scheme's exact variance bias must shrink when dx halves
    biases = []
    for n_space in (64, 128):
        grid = SpaceTimeGrid(n_space, n_space * n_space, 0.25, 0.5)
        exact = linear_increment_variance(0.0, 0.25, grid.probe_center)
        biases.append(abs(discrete_probe_variance(grid)[0] - exact) / exact)
    refines = biases[1] < biases[0]
    ok = ok and refines
    _report(
        "solver vs Gaussian oracle",
        ok,
        f"worst rel err {worst:.3f} < 0.05 at 5 probe times; scheme bias "
        f"{biases[0]:.4f} -> {biases[1]:.4f} under dx halving ({wall:.0f} s)",
    )
    assert ok and wall < 300


def test_increment_moment_exponent(outroot):
    res_l, ok_l, wall_l = _run("moments", outroot / "mom-lin")
    res_n, ok_n, wall_n = _run(
        "moments", outroot / "mom-trig", coefficient="trig", dimension=2
    )
    ok = ok_l and ok_n
    _report(
        "increment-moment exponent",
        ok,
        f"linear slope {res_l['slope']:.3f} in 0.50+-0.05, trig d=2 slope "
        f"{res_n['slope']:.3f} in 0.50+-0.07 ({wall_l + wall_n:.0f} s)",
    )
    assert ok and wall_l < 300 and wall_n < 300


def test_path_holder_exponent(outroot):
    res, ok, wall = _run("holder-path", outroot / "hp", replications=500)
    _report(
        "path Hoelder exponent",
        ok,
        f"slope {res['slope']:.3f} in [0.18, 0.30] vs theoretical 0.25 ({wall:.0f} s)",
    )
    assert ok and wall < 300


def test_occupation_formula(outroot):
    res, ok, wall = _run("occupation", outroot / "occ", replications=100)
    finest = res["residuals_by_bins"]["256"]
    _report(
        "occupation formula",
        ok,
        f"residual {finest:.4f} < 0.02 at 256 bins (decreasing), "
        f"histogram/Fourier agreement {res['agreement']:.3f} < 0.07 ({wall:.0f} s)",
    )
    assert ok and wall < 300


def test_sobolev_energy(outroot):
    res, ok, wall = _run("sobolev", outroot / "sob")
    stable = res["stable"]["rel_changes"][-1]
    diverge = min(res["diverge"]["rel_changes"])
    _report(
        "Sobolev energy",
        ok,
        f"alpha=1.0 change {stable:.3f} < 0.05 at 40->80; alpha=1.6 "
        f"changes >= {diverge:.2f} > 0.20 per doubling ({wall:.0f} s)",
    )
    assert ok and wall < 600


def test_local_time_holder_exponent(outroot):
    res, ok, wall = _run("holder-lt", outroot / "hlt", replications=200)
    _report(
        "local-time temporal Hoelder exponent",
        ok,
        f"slope {res['slope']:.3f} in [0.60, 0.85] vs theoretical sup 0.75 "
        f"({wall:.0f} s)",
    )
    assert ok and wall < 600


def test_small_ball_criterion(outroot):
    res1, ok1, wall1 = _run("smallball", outroot / "sb1", replications=200)
    res4, ok4, wall4 = _run("smallball", outroot / "sb4", dimension=4,
                            replications=50)
    ok = ok1 and ok4
    growth = min(res4["growth_factors"])
    _report(
        "small-ball criterion",
        ok,
        f"d=1 max/min ratio {res1['max_min_ratio']:.2f} < 3; d=4 growth "
        f">= {growth:.2f} > 1.05 per halving ({wall1 + wall4:.0f} s)",
    )
    assert ok and wall1 + wall4 < 600


def test_quarter_lnd_decay(outroot):
    res_l, ok_l, wall_l = _run("charfn", outroot / "cf-lin", replications=10000)
    res_n, ok_n, wall_n = _run(
        "charfn", outroot / "cf-trig", replications=10000, coefficient="trig",
        grid={"n_space": 32, "n_time": 512, "horizon": 0.125,
              "probe_x": 0.5, "explicit": True},
    )
    ok = ok_l and ok_n
    _report(
        "1/4-LND decay",
        ok,
        f"linear worst deviation {res_l['max_deviation_sigmas']:.2f} sigma < 3 "
        f"vs exp(-v^2 Var/2); nonlinear modulus "
        f"{res_n['nonlinear_modulus']:.3f} < 0.2 at scale 8 "
        f"({wall_l + wall_n:.0f} s)",
    )
    assert ok and wall_l < 300 and wall_n < 300


def test_density_collapse_and_lower_bound(outroot):
    res_l, ok_l, wall_l = _run("density", outroot / "den-lin")
    res_n, ok_n, wall_n = _run("density", outroot / "den-trig",
                               coefficient="trig")
    ok = ok_l and ok_n
    _report(
        "density collapse and lower bound",
        ok,
        f"linear collapse {res_l['collapse']:.3f} < 0.1 (oracle sup distance "
        f"{res_l['oracle_sup_distance']:.3f}); nonlinear lower bound "
        f"{res_n['lower_bound_stat']:.3f} > 0.05 ({wall_l + wall_n:.0f} s)",
    )
    assert ok and wall_l + wall_n < 600


def test_reproducibility_across_thread_counts(outroot, tmp_path):
    payloads = []
    for threads, tag in ((1, "a"), (2, "b"), (4, "c")):
        outdir = tmp_path / tag
        outdir.mkdir()
        cfg = cli.default_config("moments")
        cfg.update(
            output_dir=str(outdir),
            replications=32,
            grid={"n_space": 16, "n_time": 256, "horizon": 0.25,
                  "probe_x": 0.5, "explicit": True},
            params={"gap_steps": "2,4,8,16", "slope_halfwidth": "0.5"},
        )
        results, ok = cli._RUNNERS["moments"](cfg, outdir, threads)
        assert ok
        payloads.append(json.dumps(results, sort_keys=True))
    ok = payloads[0] == payloads[1] == payloads[2]
    _report(
        "reproducibility",
        ok,
        "identical numeric payloads across thread counts 1/2/4",
    )
    assert ok

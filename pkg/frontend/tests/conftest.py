import json

import pytest


def _write_csv(path, meta, header, rows):
    lines = [f"# {k} = {v}" for k, v in meta.items()]
    lines.append(",".join(header))
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_summary(outdir, results):
    (outdir / "summary.json").write_text(json.dumps({
        "config": {}, "results": results, "pass": True,
        "timings": {"wall": 1.0}, "version": "test",
    }))


@pytest.fixture
def make_experiment_dir(tmp_path):
    """Build a minimal synthetic output directory for a given experiment."""

    def build(figure):
        out = tmp_path / figure
        out.mkdir()
        if figure == "simulate":
            _write_csv(out / "path.csv", {}, ["time", "u_1", "u_2"],
                       [(0.0, 0.0, 0.0), (0.5, 0.1, -0.2), (1.0, 0.3, 0.1)])
            _write_summary(out, {"max_abs": 0.3})
        elif figure == "oracle-compare":
            _write_csv(out / "oracle_compare.csv",
                       {"experiment": figure},
                       ["time", "empirical_var", "exact_var", "rel_error",
                        "stderr"],
                       [(0.1, 0.11, 0.10, 0.1, 0.01),
                        (0.2, 0.19, 0.20, 0.05, 0.01)])
            _write_summary(out, {"rel_errors": [0.1, 0.05]})
        elif figure == "moments":
            _write_csv(out / "moments.csv",
                       {"experiment": figure, "slope": 0.5},
                       ["gap", "moment", "stderr"],
                       [(0.01, 0.1, 0.01), (0.04, 0.2, 0.01),
                        (0.16, 0.4, 0.02)])
            _write_summary(out, {"slope": 0.5, "slope_stderr": 0.01,
                                 "band": [0.45, 0.55], "reference": 0.5})
        elif figure == "occupation":
            _write_csv(out / "occupation.csv", {"experiment": figure},
                       ["bin_center_1", "density"],
                       [(-1.0, 0.1), (0.0, 0.8), (1.0, 0.1)])
            _write_csv(out / "agreement.csv", {"experiment": figure},
                       ["point", "histogram", "fourier", "absdiff"],
                       [(-0.5, 0.4, 0.41, 0.01), (0.5, 0.39, 0.40, 0.01)])
            _write_summary(out, {"agreement": 0.02})
        elif figure == "sobolev":
            rows = [(a, r, 1.0 + 0.1 * r * a, 0.05)
                    for a in (1.0, 1.6) for r in (20, 40, 80)]
            _write_csv(out / "sobolev.csv", {"experiment": figure},
                       ["alpha", "radius", "estimate", "stderr"], rows)
            _write_summary(out, {})
        elif figure in ("holder-path", "holder-lt"):
            _write_csv(out / "holder.csv",
                       {"experiment": figure, "slope": 0.25},
                       ["scale", "level"],
                       [(0.125, 0.6), (0.0625, 0.5), (0.03125, 0.42)])
            _write_summary(out, {"slope": 0.25, "slope_stderr": 0.01,
                                 "band": [0.18, 0.30], "reference": 0.25})
        elif figure == "smallball":
            _write_csv(out / "smallball.csv",
                       {"experiment": figure, "dimension": 4},
                       ["epsilon", "criterion", "stderr", "raw_probability"],
                       [(0.2, 1.0, 0.05, 0.5), (0.1, 1.5, 0.08, 0.3),
                        (0.05, 2.4, 0.1, 0.2)])
            _write_summary(out, {"mode": "diverging"})
        elif figure == "charfn":
            _write_csv(out / "charfn.csv",
                       {"experiment": figure, "coefficient": "linear"},
                       ["scale", "v", "modulus", "stderr", "exact"],
                       [(1.0, 2.0, 0.8, 0.01, 0.81),
                        (4.0, 8.0, 0.1, 0.01, 0.11),
                        (8.0, 16.0, 0.001, 0.0005, 0.0012)])
            _write_summary(out, {"max_deviation_sigmas": 1.0})
        elif figure == "density":
            rows = []
            for s, t in ((0.3, 0.31), (0.3, 0.34)):
                for z in (-1.0, 0.0, 1.0):
                    rows.append((s, t, z, 0.4 - 0.2 * z * z,
                                 0.39 - 0.19 * z * z))
            _write_csv(out / "density.csv",
                       {"experiment": figure, "coefficient": "linear"},
                       ["pair_s", "pair_t", "z", "density", "exact"], rows)
            _write_summary(out, {"collapse": 0.05})
        else:
            raise AssertionError(f"no fixture for {figure}")
        return out

    return build

import pytest

import hoprox.bench as bench
from hoprox.alm import AlmTrace, OuterRecord
from hoprox.bench import (
    CSV_HEADER,
    ExperimentConfig,
    RunManifest,
    emit_plots,
    read_csv,
    run_sweep,
    sweep_failed,
    write_csv,
)
from hoprox.ppa import PpaConfig, run_ppa
from hoprox.problems import gen_vi_affine


def make_trace():
    records = [
        OuterRecord(0, 0.5, 1.25, 12, 12, 3.5, 1.75),
        OuterRecord(1, 0.05, 0.4, 7, 19, 3.1, 0.5),
        OuterRecord(2, 1e-7, 1e-3, 2, 21, 3.0999999999, 0.25),
    ]
    return AlmTrace(records=records, status="converged")


def tiny_bp_config(out_dir, **overrides):
    params = dict(
        kind="bp",
        m=5,
        n=20,
        density=0.2,
        seeds=[0],
        p_values=[1.0, 2.0, 3.0],
        betas=[2.0],
        eps_subs=[0.01],
        eps=1e-3,
        max_outer=300,
        max_inner=20_000,
        out_dir=str(out_dir),
    )
    params.update(overrides)
    return ExperimentConfig(**params)


class TestWriteCsv:
    def test_structure(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_csv(make_trace(), path)
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0] == CSV_HEADER
        assert lines[1].split(",")[0] == "0"

    def test_round_trip_exact(self, tmp_path):
        path = tmp_path / "trace.csv"
        trace = make_trace()
        write_csv(trace, path)
        parsed = read_csv(path)
        assert parsed == trace.records

    def test_converged_run_ends_below_eps(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_csv(make_trace(), path)
        assert read_csv(path)[-1].primal_residual <= 1e-3

    def test_ppa_trace_columns(self, tmp_path):
        op, x0 = gen_vi_affine(6, 0)
        trace = run_ppa(op, x0, PpaConfig(p=2.0, lambda_ppa=1.0, max_iters=5))
        path = tmp_path / "vi.csv"
        write_csv(trace, path)
        rows = read_csv(path)
        assert len(rows) == 5
        assert [r.primal_residual for r in rows] == trace.residual_norms
        assert [r.multiplier_step_norm for r in rows] == trace.step_norms
        assert all(r.objective == 0.0 for r in rows)
        assert rows[-1].cumulative_inner == sum(trace.inner_solves)

    def test_unknown_trace_rejected(self, tmp_path):
        with pytest.raises(TypeError):
            write_csv(object(), tmp_path / "bad.csv")

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope\n")
        with pytest.raises(ValueError, match="header"):
            read_csv(path)


class TestRunSweep:
    def test_bp_sweep_artifacts(self, tmp_path):
        manifest = run_sweep(tiny_bp_config(tmp_path))
        assert len(manifest.runs) == 3
        for run in manifest.runs:
            assert run["status"] == "converged"
            assert (tmp_path / run["csv"]).exists()
        assert (tmp_path / "manifest.json").exists()
        assert manifest.rng_algorithm == bench.RNG_ALGORITHM
        assert not sweep_failed(manifest)

    def test_determinism_bitwise(self, tmp_path):
        m1 = run_sweep(tiny_bp_config(tmp_path / "a"))
        m2 = run_sweep(tiny_bp_config(tmp_path / "b"))
        for r1, r2 in zip(m1.runs, m2.runs):
            assert r1["csv"] == r2["csv"]
            b1 = (tmp_path / "a" / r1["csv"]).read_bytes()
            b2 = (tmp_path / "b" / r2["csv"]).read_bytes()
            assert b1 == b2

    def test_manifest_rerun_reproduces(self, tmp_path):
        run_sweep(tiny_bp_config(tmp_path / "a"))
        loaded = RunManifest.load(tmp_path / "a" / "manifest.json")
        cfg = ExperimentConfig(**{**loaded.config, "out_dir": str(tmp_path / "b")})
        run_sweep(cfg)
        for run in loaded.runs:
            assert (tmp_path / "a" / run["csv"]).read_bytes() == (tmp_path / "b" / run["csv"]).read_bytes()

    def test_instance_shared_across_p(self, tmp_path):
        cfg = tiny_bp_config(tmp_path, dump_instances=True)
        run_sweep(cfg)
        # one instance file per seed, not per run
        assert (tmp_path / "bp_seed0.instance.txt").exists()
        assert len(list(tmp_path.glob("*.instance.txt"))) == 1

    def test_vi_sweep(self, tmp_path):
        cfg = tiny_bp_config(
            tmp_path, kind="vi-affine", n=10, p_values=[1.0, 2.0], eps=0.0, max_outer=20
        )
        manifest = run_sweep(cfg)
        assert len(manifest.runs) == 2
        for run in manifest.runs:
            assert run["status"] == "ok"
            rows = read_csv(tmp_path / run["csv"])
            assert len(rows) == 20

    def test_empty_axis_rejected(self, tmp_path):
        cfg = tiny_bp_config(tmp_path, p_values=[])
        with pytest.raises(ValueError, match="p_values"):
            run_sweep(cfg)

    def test_invalid_values_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            run_sweep(tiny_bp_config(tmp_path, kind="xy"))
        with pytest.raises(ValueError):
            run_sweep(tiny_bp_config(tmp_path, betas=[-1.0]))
        with pytest.raises(ValueError):
            run_sweep(tiny_bp_config(tmp_path, p_values=[0.5]))

    def test_cell_failure_recorded_and_sweep_continues(self, tmp_path, monkeypatch):
        calls = {"n": 0}
        original = bench.run_cell

        def flaky(cfg, instance, seed, p, beta, eps_sub):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("boom")
            return original(cfg, instance, seed, p, beta, eps_sub)

        monkeypatch.setattr(bench, "run_cell", flaky)
        manifest = run_sweep(tiny_bp_config(tmp_path))
        assert len(manifest.runs) == 3
        statuses = [r["status"] for r in manifest.runs]
        assert sum(s.startswith("failed") for s in statuses) == 1
        assert sweep_failed(manifest)


class TestEmitPlots:
    def test_four_beta_sweep_gives_four_panels(self, tmp_path):
        cfg = tiny_bp_config(tmp_path, betas=[0.5, 2.0, 5.0, 10.0], p_values=[1.0, 2.0])
        manifest = run_sweep(cfg)
        script = emit_plots(manifest).read_text()
        for beta in ("beta=0.5", "beta=2,", "beta=5,", "beta=10"):
            assert script.count(beta) == 1
        for run in manifest.runs:
            assert script.count(run["csv"]) == 1

    def test_single_run_single_panel(self, tmp_path):
        cfg = tiny_bp_config(tmp_path, p_values=[2.0])
        manifest = run_sweep(cfg)
        script = emit_plots(manifest).read_text()
        assert script.count("PANELS = ") == 1
        assert script.count(manifest.runs[0]["csv"]) == 1

    def test_missing_csv_rejected(self, tmp_path):
        manifest = run_sweep(tiny_bp_config(tmp_path))
        (tmp_path / manifest.runs[0]["csv"]).unlink()
        with pytest.raises(FileNotFoundError):
            emit_plots(manifest)

    def test_script_executes(self, tmp_path):
        import subprocess
        import sys

        manifest = run_sweep(tiny_bp_config(tmp_path, p_values=[1.0, 2.0]))
        script = emit_plots(manifest)
        proc = subprocess.run(
            [sys.executable, str(script)], capture_output=True, text=True, timeout=120
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "residuals.png").exists()

import json
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcite import cli, models, sweeps
from mcite.config import ConfigError, SweepConfig


def run_cli(*argv) -> int:
    return cli.main([str(a) for a in argv])


class TestConfig:
    def test_defaults_validate(self):
        SweepConfig().validate()

    def test_text_round_trip_defaults(self):
        cfg = SweepConfig()
        assert SweepConfig.from_text(cfg.to_text()) == cfg

    @given(
        st.sampled_from(["sigma_z", "ising"]),
        st.integers(1, 6),
        st.lists(st.integers(1, 12), min_size=1, max_size=5),
        st.floats(0.0, 0.9, allow_nan=False),
        st.lists(st.floats(0.001, 5.0, allow_nan=False), min_size=1, max_size=4),
        st.booleans(),
        st.sampled_from(["tree", "hedge", "single_layer"]),
    )
    def test_text_round_trip(self, ham, N, ns, eps, betas, post, family):
        cfg = SweepConfig(hamiltonian=ham, N=N, n_values=ns, eps=eps, betas=betas, postselect=post, family=family)
        assert SweepConfig.from_text(cfg.to_text()) == cfg

    def test_comments_and_blanks(self):
        cfg = SweepConfig.from_text("# sweep\n\nN = 4  # spins\nn_values = 1, 2,3\npostselect = yes\n")
        assert cfg.N == 4 and cfg.n_values == [1, 2, 3] and cfg.postselect

    @pytest.mark.parametrize(
        "text",
        [
            "nonsense = 1\n",
            "N = four\n",
            "N\n",
            "hamiltonian = heisenberg\n",
            "eps_lo = 0.5\neps_hi = 0.1\n",
            "p_values = 1.5\n",
            "gate = W\n",
            "postselect = maybe\n",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            SweepConfig.from_text(text)

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("MCITE_THREADS", "3")
        assert SweepConfig().threads == 3

    def test_overlap_token(self):
        assert SweepConfig().overlap("random", 3) == 1 / 8


class TestCsv:
    def test_format(self):
        text = sweeps.rows_to_csv([{"a": 0.1, "b": 2, "c": True, "d": "x"}])
        assert text == "a,b,c,d\n0.10000000000000001,2,true,x\n"

    def test_float_round_trip(self):
        values = np.random.default_rng(0).normal(size=50)
        text = sweeps.rows_to_csv([{"v": v} for v in values])
        parsed = [float(line) for line in text.splitlines()[1:]]
        assert parsed == list(values)

    def test_pmap_order(self):
        assert sweeps.pmap(lambda k: k * k, [3, 1, 2], threads=3) == [1, 4, 9]


class TestSweeps:
    def test_fig3_ground_state_input(self):
        cfg = SweepConfig(hamiltonian="ising", N_values=[2, 3], n_values=[1, 2, 3], p_values=["1"], panels=["a"])
        for row in sweeps.figure3_sweep(cfg)["fig3_a"]:
            assert row["relative_reduction"] == 1.0

    def test_fig3_panel_b_monotone(self):
        cfg = SweepConfig(hamiltonian="ising", N_values=[3], n_values=list(range(1, 9)), panels=["b"])
        rows = sweeps.figure3_sweep(cfg)["fig3_b"]
        assert rows[0]["p"] == 1 / 8
        metric = [r["relative_error"] for r in rows]
        assert np.all(np.diff(metric) < 0)

    def test_fig3_n_star_non_increasing_in_p(self):
        cfg = SweepConfig(
            hamiltonian="ising", N_values=[2], p_values=["random", "0.5", "0.8", "1"], panels=["c"], n_max=40, threshold=0.05
        )
        rows = sweeps.figure3_sweep(cfg)["fig3_c"]
        n_star = [r["n_star"] for r in sorted(rows, key=lambda r: r["p"])]
        assert all(n > 0 for n in n_star)
        assert all(a >= b for a, b in zip(n_star, n_star[1:]))

    def test_fig3_n_star_trend_in_N(self):
        cfg = SweepConfig(hamiltonian="ising", N_values=[2, 3, 4, 5], p_values=["random", "0.5"], panels=["c"], n_max=60)
        rows = sweeps.figure3_sweep(cfg)["fig3_c"]
        random_init = [r["n_star"] for r in rows if r["p"] == 2.0 ** -r["N"]]
        half = [r["n_star"] for r in rows if r["p"] == 0.5]
        assert all(a <= b for a, b in zip(random_init, random_init[1:]))
        assert random_init[-1] > random_init[0]
        assert max(half) - min(half) <= 1

    def test_fig4_panel_d_normalized(self):
        cfg = SweepConfig(n_values=[2, 3], betas=[0.3, 0.6], panels=["d"])
        rows = sweeps.figure4_sweep(cfg)["fig4_d"]
        for r in rows:
            if r["n"] == 1:
                assert r["normalized"] == 1.0
        assert all(r["normalized"] < 1 for r in rows if r["n"] > 1)

    def test_fig4_panel_a_tracks_exact(self):
        cfg = SweepConfig(n_values=[1, 2, 3], eps_values=[0.02], panels=["a"])
        for r in sweeps.figure4_sweep(cfg)["fig4_a"]:
            assert r["fidelity_gs"] == pytest.approx(r["fidelity_gs_exact"], abs=1e-3)

    def test_fig5_zero_eps_flat(self):
        cfg = SweepConfig(N_values=[3], eps_factors=[0.0], n_max=30)
        rows = sweeps.figure5_sweep(cfg)["fig5"]
        e_gs = models.spectral_summary(models.build_ising(3)).e_gs
        # the chain is traceless, so the infinite-temperature energy is 0
        for r in rows:
            assert r["Egs_minus_Etilde"] == pytest.approx(e_gs, abs=1e-12)

    def test_fig5_small_eps_rate(self):
        cfg = SweepConfig(N_values=[4], eps_factors=[0.03], n_max=400)
        tables = sweeps.figure5_sweep(cfg)
        fit = tables["fig5_fit"][0]
        assert fit["fitted_a"] == pytest.approx(fit["predicted_a"], rel=0.15)
        assert all(r["top_prob"] >= r["lower_bound"] - 1e-12 for r in tables["fig5"])

    def test_protocol_runs_fixed_eps(self):
        cfg = SweepConfig(eps=0.1, n_values=[1, 2])
        rows = sweeps.protocol_runs(cfg, "tree")["tree_run"]
        assert [r["engine"] for r in rows] == ["tree_recurrence"] * 2
        assert rows[1]["beta"] == pytest.approx(0.2)


class TestCli:
    def test_schedule_prints(self, capsys):
        assert run_cli("schedule", "--family", "tree", "--n", 2, "--gate", "V") == 0
        out = capsys.readouterr().out
        assert out == "tree 2 4 1\nl\ng V 1 2\ng V 3 4\nl\ng V 1 3\np 2 1\np 4 1\n"

    def test_schedule_file_validation(self, tmp_path):
        good = tmp_path / "good.txt"
        good.write_text("hedge 1 2 1\ng U 1 2\n")
        bad = tmp_path / "bad.txt"
        bad.write_text("custom 1 3 1\ng U 1 2\ng U 1 3\n")
        assert run_cli("schedule", "--file", good) == 0
        assert run_cli("schedule", "--file", bad) == 2

    def test_validation_exit_code(self, tmp_path):
        assert run_cli("fig5", "--hamiltonian", "nope", "--out", tmp_path) == 2
        assert run_cli("fig5", "--set", "bogus=1") == 2
        assert run_cli("fig5", "--config", tmp_path / "missing.cfg") == 2

    def test_cap_exit_code(self):
        assert run_cli("fig5", "--N-values", "12", "--eps-factors", "0.03") == 3
        assert run_cli("hedge-run", "--n-values", "13", "--eps", "0.1") == 3

    def test_bound_check_exit(self, tmp_path):
        assert run_cli("bound-check", "--betas", "0.2", "--n-values", "10", "--out", tmp_path) == 0
        data = json.loads((tmp_path / "bound_check.json").read_text())
        assert data["tables"]["bound_check"][0]["holds"] is True

    def test_outputs_and_config_replay(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["fig5", "--N-values", "2,3", "--n-max", "50"]
        assert run_cli(*args, "--out", a, "--threads", "1") == 0
        # replaying the serialized config with a different thread count gives identical bytes
        assert run_cli("fig5", "--config", a / "fig5.config", "--threads", "2", "--out", b) == 0
        for name in ("fig5.csv", "fig5_fit.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        assert b"\r" not in (a / "fig5.csv").read_bytes()
        report = json.loads((a / "fig5.json").read_text())
        assert report["command"] == "fig5" and "version" in report
        assert SweepConfig.from_text(report["config"]).N_values == [2, 3]

    def test_sweep_determinism_across_threads(self, tmp_path):
        base = ["fig3", "--hamiltonian", "ising", "--N-values", "2,3", "--n-values", "1,2,3", "--panels", "a,b"]
        assert run_cli(*base, "--threads", "1", "--out", tmp_path / "x") == 0
        assert run_cli(*base, "--threads", "3", "--out", tmp_path / "y") == 0
        for name in sorted(os.listdir(tmp_path / "x")):
            if name.endswith(".csv"):
                assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()

    @pytest.mark.parametrize("command", ["gate-scaling", "tree-run", "hedge-run"])
    def test_stdout_csv(self, command, capsys):
        assert run_cli(command, "--n-values", "1,2", "--eps", "0.1") == 0
        out = capsys.readouterr().out
        assert out.count("\n") >= 2

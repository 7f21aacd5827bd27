"""CLI tests: scenario parsing, sweeps, CSV round trips, exit codes."""

import numpy as np
import pytest

from csisched.cli import (
    Scenario,
    cmd_rates,
    cmd_schedule,
    cmd_sweep_pilot,
    cmd_sweep_rho,
    cmd_sweep_users,
    cmd_validate,
    db_to_linear,
    load_scenario,
    main,
    parse_sweep_csv,
)

SMALL_SCENARIO = """
# small deterministic scenario for tests
M = 64
K = 6
C = 50
precoder = zf
snr_db = 10
rho_lo = 0.6
rho_hi = 0.9
seed = 3
horizon = 400
"""


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.txt"
    path.write_text(SMALL_SCENARIO)
    return path


class TestScenario:
    def test_load_overrides_and_defaults(self, scenario_file):
        sc = load_scenario(scenario_file)
        assert sc.K == 6 and sc.M == 64 and sc.seed == 3
        assert sc.delta == 0.05 and sc.tol == 1e-9
        sc2 = load_scenario(scenario_file, seed=99)
        assert sc2.seed == 99

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("M = 64\nbogus = 1\n")
        with pytest.raises(ValueError):
            load_scenario(path)

    def test_db_conversion(self):
        assert db_to_linear(10.0) == pytest.approx(10.0)
        assert db_to_linear(0.0) == 1.0
        assert db_to_linear(-10.0) == pytest.approx(0.1)

    def test_user_draw_is_paired(self):
        sc = Scenario(K=8, seed=5)
        a = sc.draw_users()
        b = sc.draw_users()
        assert [u.rho for u in a] == [u.rho for u in b]
        assert all(sc.rho_lo <= u.rho <= sc.rho_hi for u in a)
        assert all(u.snr == pytest.approx(10.0) for u in a)

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            Scenario(rho_lo=0.8, rho_hi=0.2)


class TestCommands:
    def test_rates_rows(self, scenario_file):
        sc = load_scenario(scenario_file)
        res = cmd_rates(sc, [0, 1, 2])
        assert res.header == ["user", "rho", "age", "rate"]
        assert len(res.rows) == 6 * 3
        rates = np.array([r[3] for r in res.rows]).reshape(6, 3)
        assert np.all(np.diff(rates, axis=1) <= 1e-12)

    def test_rates_empty_ages(self, scenario_file):
        sc = load_scenario(scenario_file)
        res = cmd_rates(sc, [])
        assert res.rows == []

    def test_sweep_rho_structure(self, scenario_file):
        sc = load_scenario(scenario_file)
        res = cmd_sweep_rho(sc, [2, 6])
        assert res.header == ["rho", "p", "T", "precoder"]
        # both precoders, both pilot lengths, all users
        assert len(res.rows) == 2 * 2 * 6
        for precoder in ("mf", "zf"):
            rows = [r for r in res.rows if r[3] == precoder and r[2] == 6]
            assert all(abs(r[1] - 1.0) < 1e-9 for r in rows)  # T = K forces p = 1
            rhos = [r[0] for r in rows]
            assert rhos == sorted(rhos)

    def test_sweep_pilot_marks_best(self, scenario_file):
        sc = load_scenario(scenario_file)
        res = cmd_sweep_pilot(sc, [10.0])
        assert res.header == ["snr_db", "precoder", "T", "sum_rate", "is_best"]
        for precoder in ("mf", "zf"):
            rows = [r for r in res.rows if r[1] == precoder]
            assert len(rows) == 7  # T in 0..6
            assert rows[0][3] == 0.0  # T = 0 yields zero rate
            best = [r for r in rows if r[4]]
            assert len(best) == 1
            assert best[0][3] == max(r[3] for r in rows)

    def test_sweep_pilot_precoder_crossing(self, tmp_path):
        # ZF wins at high SNR and loses its edge at low SNR; visible when the
        # user count crowds the array (small M - K).
        path = tmp_path / "crowded.txt"
        path.write_text("M = 12\nK = 8\nC = 20\nseed = 4\n")
        sc = load_scenario(path)
        res = cmd_sweep_pilot(sc, [-10.0, 15.0])
        best = {
            (snr, prec): max(r[3] for r in res.rows if r[0] == snr and r[1] == prec)
            for snr in (-10.0, 15.0)
            for prec in ("mf", "zf")
        }
        assert best[(-10.0, "mf")] >= best[(-10.0, "zf")]
        assert best[(15.0, "zf")] >= best[(15.0, "mf")]

    def test_sweep_users_ces_vanishes_at_block_length(self, tmp_path):
        path = tmp_path / "sc.txt"
        path.write_text("M = 64\nK = 6\nC = 6\nseed = 2\n")
        sc = load_scenario(path)
        res = cmd_sweep_users(sc, [3, 6])
        assert res.header == ["K", "best_T", "ies_rate", "ces_rate"]
        row6 = [r for r in res.rows if r[0] == 6][0]
        assert row6[3] == 0.0  # K = C leaves no data room for CES
        assert row6[2] > 0.0

    def test_validate_rows(self, scenario_file):
        sc = load_scenario(scenario_file)
        res = cmd_validate(sc, [0, 1], trials=2000)
        assert res.header == ["age", "term", "empirical", "closed_form", "rel_err", "trials", "seed"]
        assert len(res.rows) == 2 * 4
        sinr_rows = [r for r in res.rows if r[1] == "sinr"]
        assert all(r[4] < 0.2 for r in sinr_rows)

    def test_schedule_outputs(self, scenario_file):
        sc = load_scenario(scenario_file)
        schedule, res = cmd_schedule(sc, T=3, horizon=200)
        assert schedule.assignments.shape == (200, 3)
        assert res.header[:4] == ["user", "rho", "p_target", "p_achieved"]
        achieved = np.array([r[3] for r in res.rows])
        target = np.array([r[2] for r in res.rows])
        assert np.all(np.abs(achieved - target) <= 0.05)


class TestCsv:
    def test_round_trip(self, scenario_file):
        sc = load_scenario(scenario_file)
        res = cmd_rates(sc, [0, 1])
        back = parse_sweep_csv(res.to_csv())
        assert back.header == res.header
        assert len(back.rows) == len(res.rows)
        for got, want in zip(back.rows, res.rows):
            for g, w in zip(got, want):
                if isinstance(w, float):
                    assert g == w  # repr round-trips exactly
                else:
                    assert g == w

    def test_rejects_non_finite(self):
        from csisched.cli import SweepResult

        with pytest.raises(ValueError):
            SweepResult(metadata=[], header=["a"], rows=[(float("nan"),)])

    def test_rejects_ragged_rows(self):
        from csisched.cli import SweepResult

        with pytest.raises(ValueError):
            SweepResult(metadata=[], header=["a", "b"], rows=[(1.0,)])


class TestMain:
    def test_rates_to_file_deterministic(self, scenario_file, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        args = ["rates", "--scenario", str(scenario_file), "--ages", "0,1,2"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        body1 = [l for l in out1.read_text().splitlines() if not l.startswith("#")]
        assert body1[0] == "user,rho,age,rate"

    def test_seed_override_changes_output(self, scenario_file, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        base = ["rates", "--scenario", str(scenario_file), "--ages", "0"]
        main(base + ["--out", str(out1)])
        main(base + ["--out", str(out2), "--seed", "1234"])
        assert out1.read_bytes() != out2.read_bytes()

    def test_missing_scenario_fails_nonzero(self, tmp_path, capsys):
        code = main(["rates", "--scenario", str(tmp_path / "nope.txt")])
        assert code != 0
        assert "csisched:" in capsys.readouterr().err

    def test_config_error_fails_nonzero(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("M = 8\nK = 8\nprecoder = zf\n")  # ZF needs M > K
        code = main(["rates", "--scenario", str(path)])
        assert code != 0
        err = capsys.readouterr().err
        assert err.startswith("csisched:") and err.count("\n") == 1

    def test_schedule_writes_files(self, scenario_file, tmp_path):
        out = tmp_path / "sched.txt"
        code = main(
            [
                "schedule",
                "--scenario",
                str(scenario_file),
                "--pilot-length",
                "3",
                "--horizon",
                "100",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert out.exists()
        assert (tmp_path / "sched.txt.stats.csv").exists()
        first = out.read_text().splitlines()[0].split()
        assert first[0] == "0" and len(first) == 4

import numpy as np
import pytest

from laydown import expected_occupation, load_fiber_path, load_observations
from laydown.cli import main
from laydown.estimation import ModelParams
from laydown.model import BeltConfig, Rect


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExpected:
    def test_prints_reference_value(self, capsys):
        code, out, _ = run(
            capsys, "expected", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
            "--kappa", "1", "--rect", "3,15,-1,1", "--T", "7",
        )
        assert code == 0
        assert out.strip() == "2.54836"

    def test_digits_flag(self, capsys):
        code, out, _ = run(
            capsys, "expected", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
            "--kappa", "1", "--rect", "3,15,-1,1", "--T", "7", "--digits", "3",
        )
        assert code == 0
        assert out.strip() == "2.55"

    def test_invalid_params_exit_one(self, capsys):
        code, _, err = run(
            capsys, "expected", "--lambda", "-1", "--sigma1", "1", "--sigma2", "1",
            "--rect", "3,15,-1,1", "--T", "7",
        )
        assert code == 1
        assert "lam" in err

    def test_malformed_rect_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["expected", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
                  "--rect", "3,15,-1", "--T", "7"])
        assert exc.value.code == 2


class TestSimulateAndOccupancy:
    def test_round_trip_through_files(self, capsys, tmp_path):
        out_file = tmp_path / "path.csv"
        code, _, _ = run(
            capsys, "simulate", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
            "--kappa", "0.5", "--T", "5", "--steps", "1000", "--seed", "11",
            "--out", str(out_file),
        )
        assert code == 0
        path = load_fiber_path(out_file)
        assert len(path) == 1001

        code, out, _ = run(
            capsys, "occupancy", "--path", str(out_file), "--rect", "0,3,-1,1",
            "--rule", "sampled", "--digits", "12",
        )
        assert code == 0
        from laydown import occupation_time_sampled

        want = occupation_time_sampled(path, Rect(0, 3, -1, 1))
        assert float(out.strip()) == pytest.approx(want, rel=1e-11)

    def test_identical_seeds_identical_output(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for f in (f1, f2):
            run(capsys, "simulate", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
                "--T", "2", "--steps", "100", "--seed", "4", "--out", str(f))
        assert f1.read_text() == f2.read_text()

    def test_constant_path_occupancy(self, capsys, tmp_path):
        file = tmp_path / "const.csv"
        file.write_text("t,y1,y2\n0,0.5,0.5\n4,0.5,0.5\n")
        code, out, _ = run(capsys, "occupancy", "--path", str(file),
                           "--rect", "0,1,0,1")
        assert code == 0
        assert float(out.strip()) == 4.0

    def test_grid_csv_output(self, capsys, tmp_path):
        file = tmp_path / "const.csv"
        file.write_text("0,0.25,0.25\n4,0.25,0.25\n")
        out_csv = tmp_path / "grid.csv"
        code, _, _ = run(capsys, "occupancy", "--path", str(file),
                         "--rect", "0,1,0,1", "--grid", "2,2", "--out", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith(",")

    def test_strips_csv_output(self, capsys, tmp_path):
        file = tmp_path / "const.csv"
        file.write_text("0,0.5,0\n4,0.5,0\n")
        code, out, _ = run(capsys, "occupancy", "--path", str(file),
                           "--rect", "0,1,-1,1", "--strips", "5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "x_lo,x_hi,occupation"
        assert len(lines) == 6
        values = [float(line.split(",")[2]) for line in lines[1:]]
        assert values[2] == 4.0 and sum(values) == 4.0

    def test_grid_and_strips_exclusive(self, capsys, tmp_path):
        file = tmp_path / "p.csv"
        file.write_text("0,0,0\n1,1,1\n")
        code, _, err = run(capsys, "occupancy", "--path", str(file),
                           "--rect", "0,1,0,1", "--grid", "2,2", "--strips", "3")
        assert code == 1
        assert "exclusive" in err

    def test_missing_file_exit_one(self, capsys):
        code, _, err = run(capsys, "occupancy", "--path", "/nonexistent.csv",
                           "--rect", "0,1,0,1")
        assert code == 1
        assert err.startswith("error:")

    def test_no_partial_output_on_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("0,0,0\n1,oops,0\n")
        out_csv = tmp_path / "grid.csv"
        code, _, err = run(capsys, "occupancy", "--path", str(bad),
                           "--rect", "0,1,0,1", "--grid", "2,2",
                           "--out", str(out_csv))
        assert code == 1
        assert "line 2" in err
        assert not out_csv.exists()

    def test_seed_defaults_to_zero(self, capsys, tmp_path):
        defaulted, explicit = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "simulate", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
            "--T", "1", "--steps", "50", "--out", str(defaulted))
        run(capsys, "simulate", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
            "--T", "1", "--steps", "50", "--seed", "0", "--out", str(explicit))
        assert defaulted.read_text() == explicit.read_text()


class TestMc:
    def test_prints_estimate_with_std_error(self, capsys):
        code, out, _ = run(
            capsys, "mc", "--lambda", "1", "--sigma1", "1", "--sigma2", "1",
            "--kappa", "1", "--rect", "3,15,-1,1", "--T", "7",
            "--paths", "200", "--seed", "1",
        )
        assert code == 0
        mean_text, se_text = out.strip().split(" ± ")
        assert abs(float(mean_text) - 2.5484) < 0.2
        assert float(se_text) > 0


OBS_DOC = """\
T 10
kappa 1 2
region 0 1.0 -3.5 3.5
region 0.5 1.5 -2.5 2.5
region 1.0 2.5 -2.0 2.0
region 1.5 3.5 -1.25 1.25
E
{values}
"""


@pytest.fixture(scope="module")
def perfect_obs_file(tmp_path_factory):
    truth = ModelParams(1.0, 1.0, 1.0)
    regions = [Rect(0, 1, -3.5, 3.5), Rect(0.5, 1.5, -2.5, 2.5),
               Rect(1.0, 2.5, -2.0, 2.0), Rect(1.5, 3.5, -1.25, 1.25)]
    rows = []
    for region in regions:
        row = [expected_occupation(truth, BeltConfig(k), region, 10.0)
               for k in (1.0, 2.0)]
        rows.append(" ".join(f"{v:.17g}" for v in row))
    doc = OBS_DOC.format(values="\n".join(rows))
    file = tmp_path_factory.mktemp("obs") / "perfect.obs"
    file.write_text(doc)
    return file


class TestEstimate:
    def test_recovers_parameters(self, capsys, perfect_obs_file):
        code, out, _ = run(capsys, "estimate", "--obs", str(perfect_obs_file))
        assert code == 0
        lines = dict(
            line.replace(" ", "").split("=") for line in out.strip().splitlines()
        )
        assert float(lines["lambda"]) == pytest.approx(1.0, rel=1e-3)
        assert float(lines["sigma1"]) == pytest.approx(1.0, rel=1e-3)
        assert float(lines["sigma2"]) == pytest.approx(1.0, rel=1e-3)

    def test_recovers_from_reference_matrix(self, capsys, tmp_path):
        doc = OBS_DOC.format(
            values="1.23698 0.81322\n1.16451 0.70939\n"
                   "1.63478 0.93958\n1.92876 1.06620"
        )
        file = tmp_path / "ref.obs"
        file.write_text(doc)
        code, out, _ = run(capsys, "estimate", "--obs", str(file))
        assert code == 0
        lines = dict(
            line.replace(" ", "").split("=") for line in out.strip().splitlines()
        )
        assert float(lines["lambda"]) == pytest.approx(0.98351, rel=1e-2)
        assert float(lines["sigma1"]) == pytest.approx(1.01259, rel=1e-2)
        assert float(lines["sigma2"]) == pytest.approx(1.00878, rel=1e-2)

    def test_result_file(self, capsys, perfect_obs_file, tmp_path):
        out_file = tmp_path / "result.txt"
        code, _, _ = run(capsys, "estimate", "--obs", str(perfect_obs_file),
                         "--out", str(out_file))
        assert code == 0
        text = out_file.read_text()
        assert "lambda" in text and "converged True" in text

    def test_non_convergence_exit_three(self, capsys, perfect_obs_file):
        code, _, err = run(capsys, "estimate", "--obs", str(perfect_obs_file),
                           "--max-evals", "8")
        assert code == 3
        assert "converge" in err

    def test_from_path_file(self, capsys, tmp_path):
        rng = np.random.default_rng(5)
        times = np.linspace(0.0, 12.0, 2000)
        pts = np.cumsum(rng.normal(0, 0.05, (2000, 2)), axis=0)
        file = tmp_path / "walk.csv"
        with open(file, "w") as fh:
            fh.write("t,y1,y2\n")
            for t, (x, y) in zip(times, pts):
                fh.write(f"{t},{x},{y}\n")
        code, out, _ = run(
            capsys, "estimate", "--path", str(file),
            "--region=-0.5,0.5,-0.5,0.5", "--region=-1,1,-1,1",
            "--region=-0.2,0.8,-0.6,0.4", "--kappa", "0", "--max-evals", "300",
        )
        # convergence is not guaranteed at this budget; accept either success
        # or the dedicated non-convergence status
        assert code in (0, 3)
        assert "lambda" in out

    def test_requires_exactly_one_source(self, capsys):
        code, _, err = run(capsys, "estimate")
        assert code == 1
        assert "exactly one" in err

    def test_path_mode_needs_three_regions(self, capsys, tmp_path):
        file = tmp_path / "p.csv"
        file.write_text("0,0,0\n1,1,1\n")
        code, _, err = run(capsys, "estimate", "--path", str(file),
                           "--region", "0,1,0,1", "--kappa", "1")
        assert code == 1
        assert "three" in err


class TestTables:
    def test_table1_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "t1.csv"
        code, _, _ = run(capsys, "table1", "--paths", "50", "--seed", "2",
                         "--out", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "horizon,lambda,sigma,kappa,analytic,mc,mc_std_error"
        assert len(lines) == 13  # 3 horizons x 4 settings + header
        first = lines[1].split(",")
        assert float(first[4]) == pytest.approx(2.5484, abs=1e-3)

    def test_table3_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "t3.csv"
        code, _, _ = run(capsys, "table3", "--paths", "60", "--seed", "0",
                         "--out", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0].endswith("kappa=1,kappa=2")
        assert len(lines) == 5

    def test_table4_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "t4.csv"
        code, _, _ = run(capsys, "table4", "--paths", "300", "--seed", "1",
                         "--rows", "1", "--out", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0].startswith("true_lambda")
        assert len(lines) == 2
        row = [float(v) for v in lines[1].split(",")]
        assert abs(row[3] - row[0]) < 0.4  # recovered lambda near the truth


class TestObservationDocRoundTrip:
    def test_cli_written_observations_parse(self, capsys, tmp_path):
        # table3 emits CSV; the keyed observation format round-trips via io
        from laydown.benchmarks import observation_study
        from laydown import write_observations

        obs = observation_study(num_paths=40, master_seed=3)
        file = tmp_path / "study.obs"
        write_observations(obs, file)
        again = load_observations(file)
        assert np.array_equal(again.values, obs.values)

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from kappamu_aep import cli
from kappamu_aep.errors import DomainError
from reference_tables import DQPSK_BEP_PRINTED, MPSK_SEP_PRINTED


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestGrid:
    def test_range_inclusive(self):
        np.testing.assert_allclose(cli.parse_grid("0:10:2.5"), [0, 2.5, 5, 7.5, 10])

    def test_list(self):
        np.testing.assert_allclose(cli.parse_grid("1,3,7"), [1, 3, 7])

    @pytest.mark.parametrize("bad", ["5:1:1", "0:1:0", "3,2", "a:b:c"])
    def test_rejects(self, bad):
        with pytest.raises((DomainError, ValueError)):
            cli.parse_grid(bad)


class TestTables:
    def test_table2_values(self, capsys):
        code, out, _ = run(capsys, "table2")
        assert code == 0
        got = {(int(r["M"]), float(r["gamma"])): (float(r["exact"]), float(r["approx"])) for r in rows(out)}
        assert set(got) == {(M, float(g)) for M, g in MPSK_SEP_PRINTED}
        close = [abs(got[M, g][1] / MPSK_SEP_PRINTED[M, g][1] - 1) <= 1e-3 for M, g in MPSK_SEP_PRINTED]
        assert sum(close) >= 20

    def test_table4_json(self, capsys):
        code, out, _ = run(capsys, "table4", "--format", "json")
        data = json.loads(out)
        assert code == 0 and set(data) == {"gamma", "exact", "approx", "rel_err"}
        assert len(data["gamma"]) == len(DQPSK_BEP_PRINTED)
        for g, e, a in zip(data["gamma"], data["exact"], data["approx"]):
            assert e == pytest.approx(DQPSK_BEP_PRINTED[g][0], rel=1e-3)
            assert a == pytest.approx(DQPSK_BEP_PRINTED[g][1], rel=1e-3)

    def test_round_trip_floats(self, capsys):
        _, out, _ = run(capsys, "table4")
        header, first = out.splitlines()[:2]
        assert header == "gamma,exact,approx,rel_err"
        exact = first.split(",")[1]
        assert len(exact.replace(".", "").lstrip("0")) == 17
        assert repr(float(exact)) == repr(float(f"{float(exact):.17g}"))


class TestSweep:
    def test_columns_and_consistency(self, capsys):
        code, out, _ = run(capsys, "aep-sweep", "--scheme", "dqpsk", "--kappa", "1", "--mu", "1.5",
                           "--m", "1.3", "--grid", "0:20:10")
        assert code == 0
        table = rows(out)
        assert list(table[0]) == ["kappa", "mu", "m", "gamma_bar_db", "closed", "asymptotic",
                                  "oracle_approx", "oracle_exact"]
        for r in table:
            assert float(r["closed"]) == pytest.approx(float(r["oracle_approx"]), rel=1e-8)
            assert float(r["closed"]) == pytest.approx(float(r["oracle_exact"]), rel=0.05)

    def test_ordered_by_mu(self, capsys):
        _, out, _ = run(capsys, "aep-sweep", "--mu", "1,2,3", "--gamma-bar-db", "15")
        vals = [float(r["closed"]) for r in rows(out)]
        assert vals == sorted(vals, reverse=True)

    def test_monte_carlo_columns(self, capsys):
        _, out, _ = run(capsys, "aep-sweep", "--samples", "20000", "--seed", "3", "--gamma-bar-db", "5")
        r = rows(out)[0]
        assert abs(float(r["monte_carlo"]) - float(r["oracle_exact"])) <= 4 * float(r["mc_std_error"])

    def test_linear_override(self, capsys):
        _, a, _ = run(capsys, "aep-sweep", "--gamma-bar-db", "10")
        _, b, _ = run(capsys, "aep-sweep", "--gamma-bar-db", "10", "--linear")
        assert rows(a)[0]["closed"] == rows(b)[0]["closed"]


class TestOtherCommands:
    def test_truncation_decreasing(self, capsys):
        _, out, _ = run(capsys, "truncation", "--kappa", "1,5", "--mu", "2.3", "--m", "4.7")
        table = rows(out)
        for kappa in ("1", "5"):
            b = [float(r["bound"]) for r in table if r["kappa"] == kappa]
            assert len(b) == 10 and np.all(np.diff(b) < 0)

    def test_diversity(self, capsys):
        _, out, _ = run(capsys, "diversity", "--kappa", "5", "--mu", "2", "--m", "4.7", "--grid", "50,60")
        r = rows(out)[-1]
        assert float(r["local_slope"]) == pytest.approx(2.0, abs=0.05)

    def test_chi(self, capsys):
        _, out, _ = run(capsys, "chi", "--grid", "0.1:12:0.1", "--linear")
        t = rows(out)
        assert max(abs(float(r["chi_exact"]) - float(r["chi_fitted"])) for r in t) <= 0.02

    def test_relerr(self, capsys):
        _, out, _ = run(capsys, "relerr", "--grid", "1:10:1")
        assert all(float(r["rel_err"]) < 1e-3 for r in rows(out))

    def test_sample_dump(self, capsys, tmp_path):
        path = tmp_path / "x.bin"
        code, _, _ = run(capsys, "sample", "--samples", "1000", "--seed", "5", "--out", str(path))
        assert code == 0 and path.stat().st_size == 8000
        meta = json.loads((tmp_path / "x.bin.json").read_text())
        assert meta["seed"] == 5 and meta["n"] == 1000


class TestDeterminism:
    def test_byte_identical(self, capsys):
        argv = ("aep-sweep", "--scheme", "dqpsk", "--samples", "5000", "--seed", "9", "--streams", "3")
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"scheme": "mpsk:8", "kappa": [2.0], "gamma_bar_db": [12.0]}))
        _, a, _ = run(capsys, "aep-sweep", "--config", str(cfg))
        _, b, _ = run(capsys, "aep-sweep", "--scheme", "mpsk:8", "--kappa", "2", "--gamma-bar-db", "12")
        assert a == b

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        _, printed, _ = run(capsys, "table4")
        run(capsys, "table4", "--out", str(path))
        assert path.read_text() == printed


class TestExitCodes:
    def test_domain_error(self, capsys):
        code, out, err = run(capsys, "aep-sweep", "--kappa", "-1")
        assert code == 2 and out == ""
        rec = json.loads(err.strip().splitlines()[-1])
        assert rec["kind"] == "domain"

    def test_unknown_config_field(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"kapa": [1.0]}))
        assert run(capsys, "table2", "--config", str(cfg))[0] == 2

    def test_bad_scheme(self, capsys):
        assert run(capsys, "aep-sweep", "--scheme", "qam:16")[0] == 2

    def test_convergence_error(self, capsys):
        code, _, err = run(capsys, "aep-sweep", "--scheme", "dqpsk", "--kappa", "10", "--mu", "2.3",
                           "--m", "4.7", "--gamma-bar-db", "0", "--max-terms", "60")
        rec = json.loads(err.strip().splitlines()[-1])
        assert code == 3 and rec["kind"] == "convergence" and rec["error_bound"] > 0

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "kappamu_aep", "table4", "--grid", "1"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("gamma,exact")

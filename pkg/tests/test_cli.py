"""Tests for the command-line client."""

import threading
import time

import pytest

import efcensus.service.app as service_app
from efcensus.bounds import CHECK_GROUPS, run_check_group
from efcensus.census import census_run
from efcensus.cli import build_parser, main
from efcensus.doubling import doubling_from_counts
from efcensus.tables import ReferenceTable, load_reference_table


def run_cli(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out.splitlines(), captured.err.splitlines()


class TestCensusCommand:

    def test_csv_matches_core_renderer(self, capsys):
        rc, out, _ = run_cli(capsys, ["census", "--nmax", "30"])
        assert rc == 0
        assert out == census_run(30).csv_lines()

    def test_golden_prefix(self, capsys):
        rc, out, _ = run_cli(capsys, ["census", "--nmax", "6"])
        assert rc == 0
        assert out == [
            "N,count,doubles,removed",
            "1,2,true,false",
            "2,4,true,false",
            "3,8,true,false",
            "4,16,true,true",
            "5,32,true,true",
            "6,52,false,false",
        ]

    def test_split_and_symmetry_flags(self, capsys):
        rc, out, _ = run_cli(capsys, [
            "census", "--nmax", "40", "--split", "7", "--symmetry", "on"])
        assert rc == 0
        assert out == census_run(40).csv_lines()

    def test_budget_error_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["census", "--nmax", "40", "--budget", "2000"])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert "required_bytes" in err

    def test_nmax_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["census"])


class TestUSetCommand:

    def test_table_members(self, capsys):
        rc, out, _ = run_cli(capsys, ["u-set"])
        assert rc == 0
        want = doubling_from_counts(load_reference_table().counts_dict())
        assert out == [str(m) for m in want]
        assert out[:6] == ["1", "2", "3", "4", "5", "7"]

    def test_census_source(self, capsys):
        rc, out, _ = run_cli(capsys, [
            "u-set", "--source", "census", "--nmax", "10"])
        assert rc == 0
        assert out == ["1", "2", "3", "4", "5", "7", "8", "9", "10"]

    def test_certify_appends_identities(self, capsys):
        rc, out, err = run_cli(capsys, ["u-set", "--certify"])
        assert rc == 0
        members = [line for line in out if ":" not in line]
        certs = [line for line in out if ":" in line]
        assert len(certs) == 42
        assert certs[0] == "6 : +/2 -/3"
        assert "21 : +/7 +/14 -/6" in certs
        assert len([m for m in members if int(m) <= 100]) == 58
        assert len(certs) + 58 == 100  # partition of [1, 100]
        assert any("certification: pass" in line for line in err)


class TestBoundsCommand:

    def test_all_matches_core_csv(self, capsys):
        rc, out, err = run_cli(capsys, ["bounds"])
        assert rc == 0
        ref = load_reference_table()
        counts = ref.counts_dict()
        members = doubling_from_counts(counts)
        want = ["check,point,lhs,rhs,pass"]
        for token in CHECK_GROUPS:
            rep = run_check_group(token, members=members, counts=counts)
            want.extend(rep.csv_lines()[1:])
        assert out == want
        assert len(err) == len(CHECK_GROUPS)
        assert all("pass" in line for line in err)

    def test_single_group(self, capsys):
        rc, out, err = run_cli(capsys, ["bounds", "--checks", "9c"])
        assert rc == 0
        assert out[0] == "check,point,lhs,rhs,pass"
        assert len(out) == 121
        assert err and "product_floor" in err[0]

    def test_unknown_group_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["bounds", "--checks", "zz"])


class TestReportCommand:

    def test_table1_golden(self, capsys):
        rc, out, _ = run_cli(capsys, ["report", "--table1"])
        assert rc == 0
        assert out == ["n,D", "1,49", "2,3", "3,2", "4,4", "5,1",
                       "6,2", "7,2", "8,2", "9,3", "10,85"]

    def test_figure_anchors(self, capsys):
        rc, out, _ = run_cli(capsys, ["report", "--figure"])
        assert rc == 0
        assert out[0] == "N,y"
        assert len(out) == 155
        assert out[1] == "1,1.000"
        assert out[21] == "21,0.844"
        assert out[100] == "100,0.872"
        assert out[154] == "154,0.887"

    def test_verify_pass(self, capsys):
        rc, out, err = run_cli(capsys, ["report", "--verify", "--nmax", "12"])
        assert rc == 0
        assert len(out) == 13
        assert out[1] == "prefix_match,N=1,2.0,2.0,true"
        assert err and "pass" in err[0]

    def test_verify_failure_exits_1(self, capsys, monkeypatch):
        ref = load_reference_table()
        counts = list(ref.counts)
        counts[21] += 1
        monkeypatch.setattr(service_app, "_reference",
                            lambda: ReferenceTable(tuple(counts)))
        rc, out, err = run_cli(capsys, ["report", "--verify", "--nmax", "25"])
        assert rc == 1
        bad = [line for line in out if line.endswith("false")]
        assert len(bad) == 1 and "N=21 got=" in bad[0]
        assert any("FAIL" in line for line in err)

    def test_mode_flag_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["report"])


class TestRemoteServer:

    def test_round_trip_over_socket(self, capsys):
        import uvicorn

        config = uvicorn.Config(service_app.create_app(), host="127.0.0.1",
                                port=0, log_level="warning")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            deadline = time.time() + 15
            while not server.started:
                time.sleep(0.02)
                assert time.time() < deadline, "server never came up"
            port = server.servers[0].sockets[0].getsockname()[1]
            url = f"http://127.0.0.1:{port}"
            rc, out, _ = run_cli(capsys, [
                "--server", url, "census", "--nmax", "12"])
            assert rc == 0
            assert out == census_run(12).csv_lines()
        finally:
            server.should_exit = True
            thread.join(timeout=10)

    def test_unreachable_server_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--server", "http://127.0.0.1:9", "u-set"])
        assert exc.value.code == 2
        assert "cannot reach service" in capsys.readouterr().err


class TestParser:

    def test_serve_defaults(self):
        args = build_parser().parse_args(["serve"])
        assert args.host == "127.0.0.1" and args.port == 8000

    def test_global_server_flag(self):
        args = build_parser().parse_args(
            ["--server", "http://h:1", "u-set"])
        assert args.server == "http://h:1"

import csv
import io
from importlib.resources import files

import pytest

from xva import cli
from xva.cli import RunRequest, main, parse_sweep, run, validate
from xva.fva import SolverError

DATA = files("xva") / "data"


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_parse_sweep():
    assert parse_sweep("0:0.0025:0.03") == [round(0.0025 * i, 12) for i in range(13)]
    assert parse_sweep("0:0.005:0.03")[-1] == 0.03
    for bad in ("0:0:1", "0:-1:1", "0:0.1", "0:inf:1", "a:1:2", "1:0.1:0"):
        with pytest.raises(ValueError):
            parse_sweep(bad)


def test_example1_sweep(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    code, _, _ = _run(["example1", "--csa", "--paths", "4000", "--out", str(out)], capsys)
    assert code == 0
    rows = _rows(out.read_text())
    assert rows[0] == cli.OPTION_HEADER
    lams = [float(r[0]) for r in rows[1:]]
    assert lams == parse_sweep("0:0.0025:0.03")
    for r in rows[1:]:
        v = [float(x) for x in r[1:]]
        assert abs(v[-1] - sum(v[:-1])) <= 1e-8 * 100
        assert v[2] == 0.0 and v[5] == 0.0


def test_byte_identical_and_thread_independent(tmp_path, monkeypatch, capsys):
    args = ["example1", "--no-csa", "--paths", "3000", "--sweep", "0:0.01:0.03"]
    monkeypatch.setenv("XVA_THREADS", "1")
    a = _run(args, capsys)[1]
    monkeypatch.setenv("XVA_THREADS", "4")
    b = _run(args, capsys)[1]
    assert a == b and len(_rows(a)) == 5


def test_example2(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    assert main(["example2", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert rows[0] == cli.SWAP_HEADER
    assert [float(r[0]) for r in rows[1:]] == parse_sweep("0:0.005:0.03")
    assert all(float(r[1]) == pytest.approx(0.0, abs=1e-16) for r in rows[1:])


def test_price_swap_needs_curves(capsys):
    code, _, err = _run(["price-swap", "--config", str(DATA / "example2.cfg")], capsys)
    assert code == 2 and "curve" in err


def test_price_swap_with_curves(capsys):
    code, out, _ = _run(["price-swap", "--config", str(DATA / "example2.cfg"), "--discount-curve",
                         str(DATA / "ois_synthetic.csv"), "--forward-curve", str(DATA / "euribor6m_synthetic.csv")],
                        capsys)
    assert code == 0 and len(_rows(out)) == 2


def test_zero_risk_price_option(tmp_path, capsys):
    cfg = tmp_path / "zero.cfg"
    cfg.write_text("S0=100\nK=100\nT=1\nr=0.03\nsigma=0.2\n")
    code, out, _ = _run(["price-option", "--config", str(cfg)], capsys)
    rows = _rows(out)
    assert code == 0 and len(rows) == 2
    assert rows[1][1] == rows[1][-1]


def test_pre_default_route(tmp_path, capsys):
    cfg = tmp_path / "pd.cfg"
    cfg.write_text("S0=100\nK=100\nT=1\nr=0.03\nsigma=0.2\nlambda_S=0.0075\nlambda_B=0.02\nmtm=pre_default\n")
    code, out, _ = _run(["price-option", "--config", str(cfg)], capsys)
    v = [float(x) for x in _rows(out)[1]]
    assert code == 0 and v[-1] == pytest.approx(sum(v[1:-1]), abs=1e-12)


def test_config_error_exit_code_and_no_output(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("S0=100\nK=100\nT=1\nr=0.03\nsigma=0.2\nH=1\nX=2\n")
    out = tmp_path / "o.csv"
    code, _, err = _run(["price-option", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 2 and not out.exists() and "H" in err
    assert main(["price-option", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_numerical_failure_leaves_no_partial_file(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise SolverError("no convergence")

    monkeypatch.setattr(cli, "solve_premium", boom)
    out = tmp_path / "o.csv"
    code, _, err = _run(["example1", "--paths", "100", "--out", str(out)], capsys)
    assert code == 3 and not out.exists() and "no convergence" in err
    assert list(tmp_path.iterdir()) == []


def test_validate(tmp_path):
    assert validate(RunRequest("validate", target="example1")) == []
    bad = tmp_path / "bad.cfg"
    bad.write_text("S0=100\nK=100\nT=1\nr=0.03\nsigma=-0.2\nH=1\nX=2\n")
    findings = validate(RunRequest("validate", config=str(bad)))
    assert any("H >= X" in f for f in findings) and any("sigma" in f for f in findings)
    findings = validate(RunRequest("validate", config=str(DATA / "example2.cfg"), target="price-swap"))
    assert any("curve" in f for f in findings)
    findings = validate(RunRequest("validate", config=str(DATA / "example2.cfg"), target="price-swap",
                                   discount_curve=str(tmp_path / "nope.csv"),
                                   forward_curve=str(DATA / "euribor6m_synthetic.csv")))
    assert any("not found" in f for f in findings)
    assert validate(RunRequest("validate", target="example1", sweep="0:0:1"))


def test_validate_exit_code(capsys):
    assert main(["validate", "--target", "example1"]) == 0
    assert main(["validate", "--config", "/nonexistent.cfg"]) == 2

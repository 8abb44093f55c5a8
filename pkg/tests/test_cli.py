import json

import pytest

from commlab.cli import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_RESOURCE,
    RunConfig,
    load_algebra,
    main,
    run_paper_verify,
)
from commlab.elements import AGen, CConst, DConst, Tagged
from commlab.errors import ParseError
from commlab.textio import parse_element, parse_term


def write_algebra(tmp_path, name, size, ops):
    path = tmp_path / name
    path.write_text(json.dumps({
        "size": size,
        "operations": [
            {"symbol": s, "arity": a, "table": t} for s, a, t in ops
        ],
    }))
    return str(path)


def test_parse_element_round_trip():
    for text in ("a(1,0)", "b(2,3)", "d(1)", "c", "t([c,c],0)",
                 "t([t([c,c],0),d(2)],1)"):
        assert str_round_trip(text)


def str_round_trip(text):
    from commlab.elements import element_to_text
    return element_to_text(parse_element(text)) == text


def test_parse_element_errors():
    for bad in ("", "e(1,2)", "a(1)", "d()", "t([c],)", "c extra"):
        with pytest.raises(ParseError):
            parse_element(bad)


def test_parse_term_whitespace_insensitive():
    t = parse_term(" f( x0 , u( c ) ) ")
    from commlab.terms import Const, FApp, UApp, Var
    assert t == FApp((Var(0), UApp(Const(CConst()))))


def test_parse_term_errors():
    for bad in ("", "f(x0", "x", "f(x0,,x1)"):
        with pytest.raises(ParseError):
            parse_term(bad)


def test_parse_term_validates_triples():
    from commlab.errors import InvalidTripleError

    with pytest.raises(InvalidTripleError):
        parse_term("upqr{d(1);d(1);c}(x0)")


@pytest.mark.parametrize(
    "expr,expected",
    [
        ("f(a(1,0),b(2,0))", "d(1)"),
        ("u(c)", "a(1,0)"),
        ("f(c,c)", "t([c,c],0)"),
        ("upqr{d(1);d(2);c}(d(2))", "c"),
        ("u(u(u(u(u(c)))))", "c"),
    ],
)
def test_eval_command(capsys, expr, expected):
    assert main(["eval", expr]) == EXIT_OK
    assert capsys.readouterr().out.strip() == expected


def test_eval_command_parse_error(capsys):
    assert main(["eval", "f(x0,"]) == EXIT_RESOURCE
    assert "error:" in capsys.readouterr().err


def test_eval_open_term_reports_error(capsys):
    assert main(["eval", "f(x0,x1)"]) == EXIT_RESOURCE


def test_n_below_two_rejected(capsys):
    assert main(["paper-verify", "--n", "1"]) == EXIT_RESOURCE
    assert "must be >= 2" in capsys.readouterr().err


def test_unknown_command_exit_code():
    assert main(["no-such-command"]) == EXIT_RESOURCE


def test_run_config_resolution():
    cfg = RunConfig(n=2).resolve()
    assert (cfg.j_max, cfg.closure_depth, cfg.max_depth) == (1, 1, 2)
    cfg3 = RunConfig(n=3).resolve()
    assert (cfg3.j_max, cfg3.closure_depth, cfg3.max_depth) == (0, 0, 1)


def test_load_algebra(tmp_path):
    path = write_algebra(tmp_path, "semi.json", 2, [("meet", 2, [0, 0, 0, 1])])
    alg = load_algebra(path)
    assert alg.size == 2
    assert alg.operations[0].symbol == "meet"


def test_load_algebra_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"operations": []}))
    with pytest.raises(ParseError):
        load_algebra(str(bad))
    bad.write_text(json.dumps({"size": 2, "operations": [{"symbol": "f"}]}))
    with pytest.raises(ParseError):
        load_algebra(str(bad))
    bad.write_text(json.dumps({"size": 2, "operations": [
        {"symbol": "f", "arity": 1, "table": [0, 5]}]}))
    with pytest.raises(ParseError):
        load_algebra(str(bad))


def test_fin_commutator_and_simple(tmp_path, capsys):
    semi = write_algebra(tmp_path, "semi.json", 2, [("meet", 2, [0, 0, 0, 1])])
    assert main(["fin", "commutator", semi, "--m", "2"]) == EXIT_OK
    assert "{0,1}" in capsys.readouterr().out
    assert main(["fin", "simple", semi]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "simple"
    z4 = write_algebra(
        tmp_path, "z4.json", 4,
        [("add", 2, [(i + j) % 4 for i in range(4) for j in range(4)])],
    )
    assert main(["fin", "simple", z4]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "not simple"


def test_fin_series_and_tc(tmp_path, capsys):
    z2 = write_algebra(
        tmp_path, "z2.json", 2,
        [("add", 2, [0, 1, 1, 0]), ("neg", 1, [0, 1]), ("zero", 0, [0])],
    )
    assert main(["fin", "series", z2, "--max-m", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "theta_2 = [{0}, {1}]" in out
    assert "theta_3 = [{0}, {1}]" in out
    assert main(["fin", "tc", z2, "--m", "2"]) == EXIT_OK
    assert "holds" in capsys.readouterr().out
    semi = write_algebra(tmp_path, "semi.json", 2, [("meet", 2, [0, 0, 0, 1])])
    assert main(["fin", "tc", semi, "--m", "2"]) == EXIT_OK
    assert "fails" in capsys.readouterr().out
    assert main([
        "fin", "tc", semi, "--m", "2", "--delta", "[[0,1]]",
    ]) == EXIT_OK
    assert "holds" in capsys.readouterr().out


def test_fin_missing_file(capsys):
    assert main(["fin", "simple", "/no/such/file.json"]) == EXIT_RESOURCE


def test_paper_verify_fast_bounds_json(tmp_path, capsys):
    out_path = tmp_path / "reports.jsonl"
    code = main([
        "paper-verify", "--n", "2", "--j-max", "0", "--closure-depth", "0",
        "--max-depth", "1", "--format", "json", "--no-timing",
        "--out", str(out_path),
    ])
    assert code == EXIT_OK
    lines = out_path.read_text().splitlines()
    records = [json.loads(line) for line in lines]
    assert [r["name"] for r in records] == [
        "nfequal", "corner_lemma", "term_lemma", "top_commutator",
        "np1_no_failure", "control_search", "simplicity_chains",
    ]
    assert all(r["outcome"] == "pass" for r in records)
    assert all("millis" not in r for r in records)


def test_paper_verify_text_output(capsys):
    code = main([
        "paper-verify", "--n", "2", "--j-max", "0", "--closure-depth", "0",
        "--max-depth", "1",
    ])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 7
    assert "[FAIL]" not in out

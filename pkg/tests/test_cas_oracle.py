import os
import stat
import sys
import textwrap

import pytest

from iwaquad.cas_oracle import (
    GP_ENV,
    Oracle,
    ParseFailure,
    ScriptFailure,
    Unavailable,
    capitulation_verdict,
    compare_log_order,
    parse_capitulation,
    parse_clog,
    parse_invariants,
    probe,
    subgroup_order,
)

STUB = '''#!{python}
import sys
src = sys.stdin.read()
mode = {mode!r}
if "version()" in src:
    print("[2, 15, 4]")
    sys.exit(0)
if mode == "crash":
    print("  ***   at top-level: bnfinit(x^2+m)")
    sys.exit(0)
if mode == "hang":
    import time
    time.sleep(30)
if "bnflog" in src:
    print("ORACLE hk=3 h=3")
    print("ORACLE Clog=[[9], [9], []]")
    print("ORACLE Hp=[3]")
    print("ORACLE Tp=[3]")
    print("ORACLE d(x)=2 d(X)=2")
elif "polcompositum" in src:
    print("ORACLE Hk=[3]")
    print("ORACLE HK1=[9, 3]")
    print("ORACLE NU 1 E=[[3, 0]~, [1, 0, 0, 0, 0, 0]~]")
    print("ORACLE NU 2 E=[[0, 0]~, [2, 0, 0, 0, 0, 0]~]")
'''


def make_stub(tmp_path, mode="ok"):
    path = tmp_path / f"gp_{mode}"
    path.write_text(STUB.format(python=sys.executable, mode=mode))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


def test_parse_clog_formats():
    assert parse_clog("[[9],[9],[]]") == ([9], [9], [])
    assert parse_clog("[[6561,3],[6561],[3]]") == ([6561, 3], [6561], [3])
    assert parse_clog("[[81, 9, 3], [81], [9, 3]]") == ([81, 9, 3], [81], [9, 3])
    with pytest.raises(ParseFailure):
        parse_clog("[[9],[9]]")
    with pytest.raises(ParseFailure):
        parse_clog("9")


def test_parse_invariants_and_clog_order():
    text = textwrap.dedent("""\
        noise before
        ORACLE hk=108 h=9
        ORACLE Clog=[[6561,3],[6561],[3]]
        ORACLE Hp=[27]
        ORACLE Tp=[27]
        ORACLE d(x)=8 d(X)=9
        """)
    rep = parse_invariants(text, {"m": 78731, "p": 3})
    assert (rep.hk, rep.h, rep.dx, rep.dX) == (108, 9, 8, 9)
    assert rep.clog_order == 3 ** 9
    assert compare_log_order(rep, 9, 3)
    assert not compare_log_order(rep, 8, 3)
    with pytest.raises(ParseFailure):
        parse_invariants("ORACLE hk=3 h=3\n")
    with pytest.raises(ParseFailure):
        parse_invariants(text.replace("h=9", "h=nine"))


def test_parse_capitulation_published_transcripts():
    # exponent vectors as printed for three fields; the second component of the
    # principality answer is ignored, even when it is unprintable
    cases = {
        "none": ("[3]", "[9,3]", ["[3,0],[1,0,0,0,0,0]", "[0,0],[2,0,0,0,0,0]"]),
        "total": ("[6,2]", "[2,2]", ["[0,0],[4,0,0,0,0,0]", "[0,0],[9,0,0,0,0,0]"]),
    }
    for verdict, (hk, hK1, lines) in cases.items():
        text = f"ORACLE Hk={hk}\nORACLE HK1={hK1}\n" + "".join(
            f"ORACLE NU {i + 1} E={ln}\n" for i, ln in enumerate(lines))
        assert parse_capitulation(text).capitulation == verdict
    text = ("ORACLE Hk=[6]\nORACLE HK1=[54,9]\n"
            "ORACLE NU 1 E=[36,0],[rationals, too big]\nORACLE NU 2 E=[0,0],[4,0,0,0,0,0]\n")
    rep = parse_capitulation(text)
    assert rep.nu_vectors == [[36, 0], [0, 0]]
    assert rep.capitulation == "none"
    with pytest.raises(ParseFailure):
        parse_capitulation("ORACLE Hk=[3]\n")


def test_capitulation_verdict_rule():
    assert capitulation_verdict([[2, 1, 0], [0, 0, 0]], [3, 3, 3], [3]) == "none"
    assert capitulation_verdict([[0]], [6], [18]) == "total"
    assert capitulation_verdict([[3]], [27], [27]) == "partial"
    with pytest.raises(ParseFailure):
        capitulation_verdict([None], [3], [3])


def test_subgroup_order():
    assert subgroup_order([[3, 0]], [9, 3]) == 3
    assert subgroup_order([[1, 0], [0, 1]], [9, 3]) == 27
    assert subgroup_order([[36, 0]], [54, 9]) == 3
    assert subgroup_order([], []) == 1
    assert subgroup_order([[0, 0]], [2, 2]) == 1


def test_probe_missing(monkeypatch, tmp_path):
    monkeypatch.setenv(GP_ENV, str(tmp_path / "nope"))
    info = probe()
    assert not info.available and "cannot run" in info.diagnostic
    with pytest.raises(Unavailable):
        Oracle()


def test_stub_round_trip(monkeypatch, tmp_path):
    monkeypatch.setenv(GP_ENV, make_stub(tmp_path))
    info = probe()
    assert info.available and info.version == "2.15.4"
    o = Oracle(artifacts_dir=tmp_path / "art")
    rep = o.check_invariants(107, 3)
    assert rep.clog_order == 9 and rep.dX == 2
    assert (tmp_path / "art" / "invariants_m107_p3.gp").exists()
    assert "bnflog" in (tmp_path / "art" / "invariants_m107_p3.gp").read_text()
    assert (tmp_path / "art" / "invariants_m107_p3.out").exists()
    cap = o.check_capitulation(107, (1, 0, 6, 17))
    assert cap.capitulation == "none"
    assert "x^3 + 6*x + 17" in (tmp_path / "art" / "capitulation_m107.gp").read_text()


def test_stub_errors(tmp_path):
    o = Oracle(path=make_stub(tmp_path, "crash"), artifacts_dir=tmp_path / "a")
    with pytest.raises(ScriptFailure):
        o.check_invariants(107, 3)
    o = Oracle(path=make_stub(tmp_path, "hang"), artifacts_dir=tmp_path / "b", timeout=1)
    with pytest.raises(ScriptFailure, match="timeout"):
        o.check_invariants(107, 3)

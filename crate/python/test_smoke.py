import pytest

import wreathkit as wk


def test_words():
    w = wk.Word("a b B A a")
    assert str(w) == "a"
    assert str(wk.Word("b^3") * wk.Word("B")) == "bb"
    assert (w * w.inverse()) == wk.Word()
    assert wk.Word("ab").exponent_sums() == (1, 1)
    with pytest.raises(ValueError):
        wk.Word("x")


def test_rows_and_recursion():
    rows = wk.rows()
    assert len(rows) == 14
    first = rows[0]
    assert first.id == "q4-1m2z-sq"
    rec = first.recursion
    assert rec.act(wk.Word("a"), "1") in ("1", "2")
    assert isinstance(rec.swaps(wk.Word("a")), bool)
    assert str(rec.restrict(wk.Word(), 1)) == "1"


def test_twist_example():
    trace, label = wk.twist("q4-1m2z-sq", wk.Word("bbb"))
    assert trace == ["bbb", "aaa", "a"]
    assert "a b^n" in label


def test_nucleus_and_fga():
    members, k = wk.nucleus("q4-inv-z-sq-down")
    assert "a" in members and k == 3
    assert wk.fga("q4-z-sq") is None
    assert wk.fga("q4-1m2z-sq")[0] == ["o"]
    with pytest.raises(KeyError):
        wk.nucleus("no-such-row")


def test_derive_and_cli():
    assert wk.derive("z^2", "formal") == ("<1, a>s", "<b, 1>")
    out, err, code = wk.run_cli(["portraits", "--verify-actions"])
    assert code == 0 and "PASS 7" in out
    assert wk.run_cli(["frobnicate"])[2] == 2

"""Smoke test for the mgl extension module. Run after `maturin develop`."""

import mgl


def main():
    assert mgl.ball_size(2, 2) == 17
    assert mgl.count_cyc(2, 3) == 28
    w = mgl.Word("abBA")
    assert str(w) == "1" and len(w) == 0
    u = mgl.Word("aBc")
    assert str(u * u.inverse()) == "1"

    holds, longest, min_len = mgl.check_c_prime(["aab", "abb"])
    assert not holds and len(longest) == 2 and min_len == 3
    accepted, output, steps = mgl.dehn_member("bAbaBB", ["ab"])
    assert accepted and output == "1" and steps == 2
    assert mgl.newman_member("abab", "ab", 2)
    assert not mgl.newman_member("ab", "ab", 2)
    assert len(mgl.cyclic_classes([str(c) for c in mgl.enumerate_cyc(2, 2)])) == 4

    a = mgl.closure_fingerprint(["ab"], 3)
    b = mgl.closure_fingerprint(["aB"], 3)
    assert a.distance(a) == 0.0 and a.distance(b) > 0.0

    assert mgl.gamma_reduce("bc") == "d"
    assert mgl.grig_member("bb", "0(0)*")
    assert not mgl.grig_member("adad", "0(0)*")

    assert mgl.covering_number_zm(1, 5) == 6
    assert mgl.covering_number_zm(2, 1) == 4
    assert mgl.hnf(2, [[2, 4], [0, 6]]) == [[2, 4], [0, 6]]

    try:
        mgl.count_cyc(2, 30, budget=10)
    except mgl.BudgetExceeded:
        pass
    else:
        raise AssertionError("budget was not enforced")
    print("mgl smoke test passed")


if __name__ == "__main__":
    main()

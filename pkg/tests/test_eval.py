import pytest
from hypothesis import given, settings, strategies as st

from sizedlang import core as c
from sizedlang.driver import check_path, check_source
from sizedlang.errors import EvalError, FuelExhausted
from sizedlang.eval import (
    ERASED,
    TOKENS,
    Machine,
    OCon,
    ONat,
    OPair,
    OThunk,
    RApp,
    RDelay,
    RForce,
    RGlobal,
    RPair,
    RVar,
    R_UNIT,
    erase,
    evaluate,
    main_candidates,
    observe,
    render,
    stream_elements,
)

from conftest import POSITIVE, PRELUDE, CORPUS

FIB = CORPUS / "positive" / "fib.ma"
SP_RUN = CORPUS / "positive" / "sp_run.ma"


def loaded(path):
    s = check_path(path)
    assert not s.diagnostics
    return s.signature, [s.checked[n] for n in s.order]


def numbers(outcome):
    return [int(x) for x in outcome.lines]


def nat_literal(n: int) -> str:
    return "zero" if n == 0 else f"succ ({nat_literal(n - 1)})"


class TestErase:
    def test_bounded_lambda_becomes_thunk(self):
        sig, _ = loaded(FIB)
        e = c.Lam("j", c.Pair(c.Con("zero"), c.Var("rest")), kind="bounded")
        assert erase(e, sig) == RDelay(RPair(erase(c.Con("zero"), sig), RVar("rest")))

    def test_bounded_application_forces(self):
        sig, _ = loaded(FIB)
        assert erase(c.App(c.Var("s"), c.Var("i"), kind="bounded"), sig) == RForce(RVar("s"))

    def test_size_free_term_unchanged(self):
        sig, _ = loaded(FIB)
        e = c.App(c.App(c.Def("add"), c.Var("m"), kind="explicit"), c.Var("n"), kind="explicit")
        assert erase(e, sig) == RApp(RApp(RGlobal("add"), RVar("m")), RVar("n"))

    def test_size_and_type_arguments_dropped(self):
        sig, _ = loaded(FIB)
        e = c.App(c.App(c.Def("tail"), c.Def("Nat"), kind="erased"), c.Var("k"), kind="size")
        assert erase(e, sig) == RGlobal("tail")
        assert erase(e, sig, TOKENS) == RApp(RApp(RGlobal("tail"), R_UNIT), R_UNIT)

    def test_existential_pair_keeps_payload(self):
        sig, _ = loaded(SP_RUN)
        e = c.Pair(c.SizeVal(c.INFTY), c.Var("sp"), existential=True)
        assert erase(e, sig) == RVar("sp")

    def test_no_sizes_or_type_formers_survive(self):
        sig, cds = loaded(SP_RUN)
        m = Machine(sig, cds)
        text = repr(m.funs) + repr(m.lets)
        assert "SizeVal" not in text and "Stream" not in text and "'SP'" not in text


class TestEvaluate:
    def test_every_other(self):
        for name in ("everyother.ma", "zero_one_many.ma"):
            sig, cds = loaded(CORPUS / "positive" / name)
            assert evaluate(sig, cds, "everyOtherMain", 4).lines == ["cons 1 (cons 3 nil)"]

    def test_add_zero(self):
        s = check_source("let n : Nat = succ (succ zero)\nlet r : Nat = add zero n", "<t>", PRELUDE)
        out = evaluate(s.signature, s.checked.values(), "r", 1)
        assert out.tree == ONat(2)

    def test_identity_on_constructor(self):
        s = check_source("let id (x : Nat) : Nat = x\nlet r : Nat = id zero", "<t>", PRELUDE)
        assert evaluate(s.signature, s.checked.values(), "r", 1).tree == ONat(0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 30), st.integers(0, 30))
    def test_add_is_addition(self, m, n):
        src = f"let r : Nat = add ({nat_literal(m)}) ({nat_literal(n)})"
        s = check_source(src, "<t>", PRELUDE)
        assert not s.diagnostics
        for mode in (ERASED, TOKENS):
            assert evaluate(s.signature, s.checked.values(), "r", 1, mode).tree == ONat(m + n)

    def test_fib_prefix(self):
        sig, cds = loaded(FIB)
        out = evaluate(sig, cds, "fibMain", 8, fuel=10**6)
        assert numbers(out) == [0, 1, 1, 2, 3, 5, 8, 13]

    def test_run_identity_processor(self):
        sig, cds = loaded(SP_RUN)
        assert numbers(evaluate(sig, cds, "runIdOnNats", 5)) == [0, 1, 2, 3, 4]

    def test_depth_zero_is_opaque(self):
        sig, cds = loaded(FIB)
        assert evaluate(sig, cds, "fibMain", 0).tree == OThunk()

    def test_fuel_exhaustion(self):
        sig, cds = loaded(FIB)
        with pytest.raises(FuelExhausted):
            evaluate(sig, cds, "fibMain", 16, fuel=50)

    def test_fuel_from_environment(self, monkeypatch):
        monkeypatch.setenv("SIZEDLANG_FUEL", "10")
        sig, cds = loaded(FIB)
        with pytest.raises(FuelExhausted):
            evaluate(sig, cds, "fibSum", 16)

    def test_unknown_main(self):
        sig, cds = loaded(FIB)
        with pytest.raises(EvalError):
            evaluate(sig, cds, "Stream", 1)

    def test_memoization_keeps_fib_linear(self):
        sig, cds = loaded(FIB)
        steps = [evaluate(sig, cds, "fibMain", d).steps for d in (8, 9, 10)]
        # Growth is dominated by the unary additions, not by recomputing the stream.
        assert steps[2] - steps[1] < 2 * (steps[1] - steps[0]) + 40


class TestObservation:
    def test_stream_elements(self):
        tree = OPair(ONat(0), OPair(ONat(1), OThunk()))
        assert stream_elements(tree) == [ONat(0), ONat(1)]
        assert stream_elements(ONat(3)) is None

    def test_render(self):
        assert render(OCon("cons", (ONat(1), OCon("nil")))) == "cons 1 nil"
        assert render(OCon("left", (OCon("cons", (ONat(1), OCon("nil"))),))) == "left (cons 1 nil)"
        assert render(OPair(ONat(1), OThunk())) == "(1, <delayed>)"

    @pytest.mark.parametrize("path", POSITIVE, ids=lambda p: p.name)
    def test_erasure_coherence(self, path):
        sig, cds = loaded(path)
        for name in main_candidates(cds, str(path)):
            for depth in range(1, 17):
                a = evaluate(sig, cds, name, depth, ERASED, fuel=10**6).tree
                b = evaluate(sig, cds, name, depth, TOKENS, fuel=10**6).tree
                assert a == b, (name, depth)

    @pytest.mark.parametrize("main", ["nats", "runIdOnNats"])
    def test_productivity_linear_fuel(self, main):
        sig, cds = loaded(SP_RUN)
        for depth in range(1, 33):
            out = evaluate(sig, cds, main, depth, fuel=20 * depth)
            assert len(out.lines) == depth

    def test_fib_productive(self):
        sig, cds = loaded(FIB)
        for depth in range(1, 21):
            assert len(evaluate(sig, cds, "fibMain", depth).lines) == depth

    def test_zipwith_pointwise(self):
        sig, cds = loaded(FIB)
        n = 12
        s = numbers(evaluate(sig, cds, "fibMain", n))
        t = numbers(evaluate(sig, cds, "fibTail", n))
        assert numbers(evaluate(sig, cds, "fibSum", n)) == [x + y for x, y in zip(s, t)]

    def test_observe_shares_machine(self):
        sig, cds = loaded(FIB)
        m = Machine(sig, cds)
        v = m.global_value("fibMain")
        first = observe(m, v, 6)
        used = m.budget.used
        assert observe(m, v, 6) == first and m.budget.used == used

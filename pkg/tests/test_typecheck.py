import random
import re

import pytest

from sizedlang import core as c
from sizedlang.check.checker import Checker
from sizedlang.core import INFTY, ConstraintCtx, SizeSucc, SizeVar
from sizedlang.driver import Session, check_path, check_source
from sizedlang.errors import TypeCheckError
from sizedlang.sizes import AUDIT

from conftest import CORPUS, NEGATIVE, POSITIVE, PRELUDE

i, j, k = SizeVar("i"), SizeVar("j"), SizeVar("k")
STREAM = """
cofun Stream : +(A : Set) -(i : Size) -> Set
{ Stream A i = [j < i] -> A & Stream A j
}
"""


def session(extra: str = STREAM) -> Session:
    s = check_source(extra, "<test>", PRELUDE)
    assert not s.diagnostics, [d.render() for d in s.diagnostics]
    return s


def stream(a, size):
    return c.apply(c.Def("Stream"), [a, c.from_size(size)])


def ctx_with(*items):
    ctx = ConstraintCtx()
    for item in items:
        ctx = ctx.assume(*item[1:]) if item[0] == "lt" else ctx.bind(*item)
    return ctx


def expected_code(path):
    m = re.search(r"-- expect: (E\d+)", path.read_text())
    return m.group(1)


class TestCorpus:
    @pytest.mark.parametrize("path", POSITIVE, ids=lambda p: p.name)
    def test_positive_accepted(self, path):
        s = check_path(path)
        assert s.diagnostics == [], [d.render() for d in s.diagnostics]

    @pytest.mark.parametrize("path", NEGATIVE, ids=lambda p: p.name)
    def test_negative_rejected_with_code(self, path):
        s = check_path(path)
        codes = [d.error.code for d in s.diagnostics]
        assert codes == [expected_code(path)]

    def test_negative_corpus_size(self):
        assert len(NEGATIVE) >= 8

    def test_bad_self_call(self):
        s = check_source("fun bad : [i : Size] -> |i| -> Nat { bad i = bad i }", "<t>", PRELUDE)
        assert [d.error.kind for d in s.diagnostics] == ["measureNotDecreasing"]

    def test_no_measure_infty_admissions(self):
        AUDIT.reset()
        for path in POSITIVE:
            check_path(path)
        assert AUDIT.measure_infty_admissions == 0
        assert AUDIT.infty_admissions > 0  # idSP needs `# < #` at instantiation


class TestInfer:
    def test_force_successor_depth(self):
        s = session()
        ch = s.checker
        ctx = ctx_with(("A", c.SetSort()), ("i", c.SizeSort()), ("s", stream(c.Var("A"), SizeSucc(i))))
        _, t = ch.infer(ctx, c.App(c.Var("s"), c.Var("i")))
        assert c.alpha_equal(t, c.Prod(c.Var("A"), stream(c.Var("A"), i)))

    def test_force_own_depth_violates_bound(self):
        ch = session().checker
        ctx = ctx_with(("A", c.SetSort()), ("i", c.SizeSort()), ("s", stream(c.Var("A"), i)))
        with pytest.raises(TypeCheckError) as err:
            ch.infer(ctx, c.App(c.Var("s"), c.Var("i")))
        assert err.value.kind == "boundViolation"

    def test_constructor_defaults_to_closure_index(self):
        ch = session().checker
        elab, t = ch.infer(ConstraintCtx(), c.Con("zero"))
        assert t == c.App(c.Def("Nat"), c.SizeVal(INFTY))
        assert elab == c.App(c.Con("zero"), c.SizeVal(INFTY))

    def test_constructor_parameters_from_arguments(self):
        ch = session().checker
        ctx = ctx_with(("x", c.Def("Nat")))
        _, t = ch.infer(ctx, c.apply(c.Con("cons"), [c.Var("x"), c.Con("nil")]))
        nat = c.App(c.Def("Nat"), c.SizeVal(INFTY))
        assert c.alpha_equal(t, c.apply(c.Def("List"), [nat, c.SizeVal(INFTY)]))


class TestCheck:
    def test_delay_against_stream(self):
        ch = session().checker
        ctx = ctx_with(("i", c.SizeSort()), ("n", c.Def("Nat")))
        body = c.Lam("j", c.Pair(c.Con("zero"), c.Var("d")))
        ctx2 = ctx.bind("d", c.Pi("_", c.Def("Nat"), c.Def("Nat")))
        with pytest.raises(TypeCheckError):
            ch.check(ctx2, body, stream(c.Def("Nat"), i))  # second component is no stream
        e = session(STREAM + "\ncofun zs : [i : Size] -> |i| -> Stream Nat i { zs i = \\ j -> (zero, zs j) }")
        assert not e.diagnostics
        elab = e.checked["zs"].clauses[0].body
        assert isinstance(elab, c.Lam) and elab.kind == "bounded"
        assert elab.body.existential is False

    def test_existential_pair(self):
        src = STREAM + """
cofun SP : -(A : Set) +(B : Set) -(i : Size) +(j : Size) -> |i,j| -> Set
{ SP A B i j = Either (A -> [j' < j] & SP A B i j') (B & ([i' < i] -> SP A B i' #)) }
let step [A, B : Set] [i, j, j' : Size] (sp : SP A B i j') (f : [k < j] -> SP A B i k) : [m < $ j'] & SP A B i m
  = (j', sp)
"""
        s = session(src)
        elab = s.checked["step"].body
        while isinstance(elab, c.Lam):
            elab = elab.body
        assert isinstance(elab, c.Pair) and elab.existential is True

    def test_constructor_against_stream(self):
        ch = session().checker
        with pytest.raises(TypeCheckError) as err:
            ch.check(ctx_with(("i", c.SizeSort())), c.Con("zero"), stream(c.Def("Nat"), i))
        assert err.value.kind == "mismatch"


class TestSubtype:
    def test_stream_antitone(self):
        ch = session().checker
        ctx = ctx_with(("j", c.SizeSort()), ("lt", "k", j))
        ch.subtyper.check(ctx, stream(c.Def("Nat"), j), stream(c.Def("Nat"), SizeSucc(k)))

    def test_stream_not_covariant(self):
        ch = session().checker
        ctx = ctx_with(("j", c.SizeSort()), ("lt", "k", j))
        with pytest.raises(TypeCheckError) as err:
            ch.subtyper.check(ctx, stream(c.Def("Nat"), SizeSucc(k)), stream(c.Def("Nat"), j))
        assert err.value.kind == "notASubtype"

    def test_list_monotone(self):
        ch = session().checker
        ctx = ctx_with(("A", c.SetSort()), ("i", c.SizeSort()))
        lst = lambda s: c.apply(c.Def("List"), [c.Var("A"), c.from_size(s)])
        ch.subtyper.check(ctx, lst(i), lst(SizeSucc(i)))
        assert not ch.subtyper.is_subtype(ctx, lst(SizeSucc(i)), lst(i))

    def test_unsized_use_is_closure(self):
        ch = session().checker
        ctx = ctx_with(("i", c.SizeSort()))
        assert ch.subtyper.is_subtype(ctx, c.App(c.Def("Nat"), c.Var("i")), c.Def("Nat"))

    def test_preorder_on_corpus_types(self):
        s = session()
        ch = s.checker
        ctx = ctx_with(("i", c.SizeSort()), ("lt", "j", i), ("lt", "k", j))
        sizes = [i, j, k, SizeSucc(i), SizeSucc(k), INFTY]
        formers = [
            lambda s_: stream(c.Def("Nat"), s_),
            lambda s_: c.App(c.Def("Nat"), c.from_size(s_)),
            lambda s_: c.apply(c.Def("List"), [c.Def("Nat"), c.from_size(s_)]),
            lambda s_: c.Pi("_", c.App(c.Def("Nat"), c.from_size(s_)), c.Def("Nat")),
            lambda s_: c.BoundedAll("m", s_, c.Def("Nat")),
            lambda s_: c.BoundedEx("m", s_, c.Def("Nat")),
        ]
        population = [f(s_) for f in formers for s_ in sizes]
        rng = random.Random(3)
        for t in population:
            assert ch.subtyper.is_subtype(ctx, t, t)
        for _ in range(400):
            a, b, d = (rng.choice(population) for _ in range(3))
            if ch.subtyper.is_subtype(ctx, a, b) and ch.subtyper.is_subtype(ctx, b, d):
                assert ch.subtyper.is_subtype(ctx, a, d)


class TestPatterns:
    def test_nested_cons(self):
        ch = session().checker
        ctx = ctx_with(("A", c.SetSort()), ("i", c.SizeSort()))
        pat = c.PCon("cons", (c.PVar("j"), c.PVar("a"), c.PCon("cons", (c.PVar("k"), c.PVar("a2"), c.PVar("as")))))
        out, _, _ = ch.check_pattern(ctx, pat, c.apply(c.Def("List"), [c.Var("A"), c.Var("i")]))
        assert ("j", i) in out.hypotheses and ("k", j) in out.hypotheses
        assert c.alpha_equal(out.lookup("as"), c.apply(c.Def("List"), [c.Var("A"), c.Var("k")]))

    def test_pair_pattern(self):
        ch = session().checker
        ctx = ctx_with(("A", c.SetSort()), ("j", c.SizeSort()))
        t = c.Prod(c.Var("A"), stream(c.Var("A"), j))
        out, pe, _ = ch.check_pattern(ctx, c.PPair(c.PVar("a"), c.PVar("as")), t)
        assert out.hypotheses == () and out.lookup("a") == c.Var("A")
        assert pe.existential is False

    def test_variable_pattern(self):
        ch = session().checker
        out, _, _ = ch.check_pattern(ConstraintCtx(), c.PVar("x"), c.Def("Nat"))
        assert out.bindings == (("x", c.Def("Nat")),)

    def test_wrong_constructor(self):
        ch = session().checker
        with pytest.raises(TypeCheckError):
            ch.check_pattern(ConstraintCtx(), c.PCon("nil", (c.PVar("j"),)), c.Def("Nat"))

    def test_arity(self):
        ch = session().checker
        with pytest.raises(TypeCheckError) as err:
            ch.check_pattern(ConstraintCtx(), c.PCon("succ", (c.PVar("j"),)), c.Def("Nat"))
        assert err.value.kind == "patternArity"


class TestMeasures:
    def test_fib_calls_ok(self):
        assert not check_path(CORPUS / "positive" / "fib.ma").diagnostics

    def test_run_lexicographic(self):
        assert not check_path(CORPUS / "positive" / "sp_run.ma").diagnostics

    def test_partial_self_application(self):
        src = (
            "let app (h : [i : Size] -> Nat i -> Nat) : Nat = zero\n"
            "fun f : [i : Size] -> Nat i -> Nat { f i (zero j) = zero ; f i (succ j n) = app f }"
        )
        s = check_source(src, "<t>", PRELUDE)
        assert [d.error.kind for d in s.diagnostics] == ["measureNotDecreasing"]

    def test_default_measure_all_sizes(self):
        src = "fun g : [i : Size] -> Nat i -> Nat { g i (zero j) = zero ; g i (succ j n) = g j n }"
        assert not check_source(src, "<t>", PRELUDE).diagnostics

    def test_measure_needs_pattern(self):
        src = "fun h : [i : Size] -> |i| -> Nat -> Nat { h = \\ i n -> zero }"
        s = check_source(src, "<t>", PRELUDE)
        assert s.diagnostics == [] or s.diagnostics[0].error.kind in ("unboundSizeInMeasure", "patternArity")

    def test_unfold_fuel(self):
        src = "cofun Loop : (A : Set) -> Set { Loop A = Loop A }\nlet x : Loop Nat = zero"
        s = check_source(src, "<t>", PRELUDE)
        kinds = [d.error.kind for d in s.diagnostics]
        assert kinds[0] == "measureNotDecreasing"


class TestErrors:
    def test_each_error_has_span(self):
        for path in NEGATIVE:
            for d in check_path(path).diagnostics:
                assert d.error.span is not None
                assert re.match(r".+:\d+:\d+: \[E\d{3}\] ", d.render())

    def test_continues_after_failure(self):
        src = "let a : Nat = Set\nlet b : Nat = Set\nlet c : Nat = zero"
        s = check_source(src, "<t>", PRELUDE)
        assert len(s.diagnostics) == 2
        assert "c" in s.checked

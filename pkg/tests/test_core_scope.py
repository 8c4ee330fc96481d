import itertools

import pytest

from sizedlang import core as c
from sizedlang.core import INFTY, Polarity, SizeSucc, SizeVar, normalize_size
from sizedlang.errors import ScopeError
from sizedlang.scope import ScopeChecker, scope_check, unscope_decl
from sizedlang.syntax import parse_source, print_decl

from conftest import POSITIVE, PRELUDE


def checker_with_prelude() -> ScopeChecker:
    sc = ScopeChecker()
    sc.check(parse_source(PRELUDE.read_text()))
    return sc


class TestNormalizeSize:
    def test_successors_counted(self):
        assert normalize_size(SizeSucc(SizeSucc(SizeVar("i")))) == ("i", 2)

    def test_succ_infty_collapses(self):
        assert normalize_size(SizeSucc(INFTY)) == (None, 0)

    def test_identity(self):
        assert normalize_size(SizeVar("i")) == ("i", 0)

    @pytest.mark.parametrize("depth", range(6))
    def test_succ_increments_offset(self, depth):
        s = c.make_size("k", depth)
        assert normalize_size(SizeSucc(s)) == ("k", depth + 1)
        inf = c.make_size(None, depth)
        assert normalize_size(SizeSucc(inf)) == (None, 0)


class TestPolarityTable:
    P = list(Polarity)

    def test_table(self):
        pos, neg, mix = Polarity.POS, Polarity.NEG, Polarity.MIXED
        assert pos.compose(neg) is neg
        assert neg.compose(neg) is pos
        assert neg.compose(pos) is neg
        for p in self.P:
            assert pos.compose(p) is p
            assert mix.compose(p) is mix and p.compose(mix) is mix

    def test_associative_and_commutative(self):
        for a, b in itertools.product(self.P, repeat=2):
            assert a.compose(b) is b.compose(a)
            for x in self.P:
                assert a.compose(b).compose(x) is a.compose(b.compose(x))


class TestSubstitution:
    def test_capture_avoiding(self):
        # (\ y -> x y)[x := y] must not capture the free y.
        e = c.Lam("y", c.App(c.Var("x"), c.Var("y")))
        out = c.subst(e, {"x": c.Var("y")})
        assert isinstance(out, c.Lam) and out.name != "y"
        assert c.free_vars(out) == {"y"}

    def test_size_substitution_keeps_offset(self):
        e = c.SizeVal(SizeSucc(SizeVar("i")))
        assert c.subst(e, {"i": c.SizeVal(INFTY)}) == c.SizeVal(INFTY)
        assert c.subst(e, {"i": c.SizeVal(SizeSucc(SizeVar("j")))}) == c.SizeVal(c.make_size("j", 2))

    def test_fresh_is_fresh(self):
        names = {c.fresh("j") for _ in range(50)}
        assert len(names) == 50
        assert c.fresh("x", {"x_1", "x_2"}) not in {"x_1", "x_2"}

    def test_alpha_equal(self):
        a = c.Pi("x", c.SetSort(), c.Var("x"))
        b = c.Pi("y", c.SetSort(), c.Var("y"))
        assert c.alpha_equal(a, b)
        assert not c.alpha_equal(a, c.Pi("y", c.SetSort(), c.Var("x")))


class TestScopeCheck:
    def test_pattern_synonyms_expand(self):
        sc = checker_with_prelude()
        src = """
pattern get f = left f
fun isGet : Either Nat Nat -> Nat { isGet (get f) = f ; isGet (right x) = x }
"""
        _, fun = sc.check(parse_source(src))
        assert fun.clauses[0].patterns[0] == c.PCon("left", (c.PVar("f"),))

    def test_let_is_not_recursive(self):
        with pytest.raises(ScopeError) as err:
            scope_check(parse_source("let x = x"))
        assert err.value.kind == "unboundIdentifier" and err.value.code == "E101"

    def test_duplicate(self):
        with pytest.raises(ScopeError) as err:
            scope_check(parse_source("let x : Set = Set\nlet x : Set = Set"))
        assert err.value.code == "E102"

    def test_synonym_arity(self):
        sc = checker_with_prelude()
        src = "pattern get f = left f\nfun g : Either Nat Nat -> Nat { g (get) = zero ; g (right x) = x }"
        with pytest.raises(ScopeError) as err:
            sc.check(parse_source(src))
        assert err.value.code == "E103"

    def test_unbound_size_in_measure(self):
        sc = checker_with_prelude()
        with pytest.raises(ScopeError) as err:
            sc.check(parse_source("fun f : [i : Size] -> |k| -> Nat { f i = zero }"))
        assert err.value.code == "E006"

    def test_measure_only_at_top(self):
        sc = checker_with_prelude()
        with pytest.raises(ScopeError) as err:
            sc.check(parse_source("let t : Set = |#| -> Nat"))
        assert err.value.code == "E104"

    def test_fib_file(self):
        sc = checker_with_prelude()
        decls = sc.check(parse_source((PRELUDE.parent / "positive" / "fib.ma").read_text()))
        names = [d.name for d in decls]
        assert names[:4] == ["Stream", "tail", "zipWith", "fib"]
        fib = decls[3]
        assert fib.measure == (SizeVar("i"),) and fib.is_recursive

    def test_omitted_size_index_is_unsized_use(self):
        sc = checker_with_prelude()
        (d,) = sc.check(parse_source("let n : Nat = zero"))
        assert d.type == c.Def("Nat")

    @pytest.mark.parametrize("path", POSITIVE, ids=lambda p: p.name)
    def test_idempotent_on_rendering(self, path):
        first = checker_with_prelude().check(parse_source(path.read_text()))
        text = "\n\n".join(print_decl(unscope_decl(d)) for d in first)
        second = checker_with_prelude().check(parse_source(text))
        assert [d.name for d in first] == [d.name for d in second]
        for a, b in zip(first, second):
            assert a.type == b.type
            assert [cl.patterns for cl in a.clauses] == [cl.patterns for cl in b.clauses]
            assert [cl.body for cl in a.clauses] == [cl.body for cl in b.clauses]
            assert a.body == b.body and a.measure == b.measure

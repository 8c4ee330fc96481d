"""Acceptance gate: one PASS/FAIL line per criterion.

Run with `pytest tests/test_acceptance.py -s` or `python3 tests/test_acceptance.py`.
"""

import io
import random
import re
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import CORPUS, NEGATIVE, POSITIVE  # noqa: E402

from sizedlang.cli import main as cli_main  # noqa: E402
from sizedlang.core import Polarity  # noqa: E402
from sizedlang.driver import check_path  # noqa: E402
from sizedlang.eval import ERASED, TOKENS, evaluate, main_candidates  # noqa: E402
from sizedlang.oracle.lattice import FinUniverse, ListF, SetOperator, iterate_inflationary, run_oracle  # noqa: E402
from sizedlang.oracle.typemodel import TypeModel, variance_table  # noqa: E402
from sizedlang.oracle.valuation import audit_judgments, random_context, random_judgments, random_size  # noqa: E402
from sizedlang.sizes import lt_measure  # noqa: E402


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    return cli_main(list(argv), out, err), out.getvalue(), err.getvalue()


def ac1():
    start = time.perf_counter()
    code, out, err = cli("check", *map(str, POSITIVE))
    elapsed = time.perf_counter() - start
    ok = code == 0 and elapsed < 5
    return ok, f"{len(POSITIVE)} positive files, exit {code}, {elapsed:.2f}s{'' if code == 0 else ' ' + err[:200]}"


def ac2():
    wrong = []
    for path in NEGATIVE:
        expected = re.search(r"-- expect: (E\d+)", path.read_text()).group(1)
        code, _, err = cli("check", str(path))
        got = re.findall(r"\[(E\d+)\]", err)
        if code != 1 or got != [expected]:
            wrong.append(f"{path.name}: expected {expected}, got {got} exit {code}")
    ok = len(NEGATIVE) >= 8 and not wrong
    return ok, f"{len(NEGATIVE)} negative files, {len(wrong)} mismatched" + ("; " + "; ".join(wrong) if wrong else "")


def ac3():
    fib = CORPUS / "positive" / "fib.ma"
    code, out, err = cli("run", str(fib), "--main", "fibMain", "--depth", "8", "--fuel", str(10**6))
    got = out.split()
    ok = code == 0 and got == ["0", "1", "1", "2", "3", "5", "8", "13"]
    return ok, f"printed {','.join(got)} (exit {code})"


def ac4():
    start = time.perf_counter()
    run = run_oracle(range(1, 7), trials=200, seed=2024)
    elapsed = time.perf_counter() - start
    random_ops = sum(r.seed is not None for r in run.reports)
    ok = run.ok and random_ops >= 1000 and elapsed < 30
    return ok, (
        f"{random_ops} random + {len(run.reports) - random_ops} named operators, "
        f"{len(run.counterexamples)} counterexamples, {elapsed:.2f}s"
    )


def ac5():
    bad = []
    for k in range(1, 9):
        u = FinUniverse.lists(k)
        chain = iterate_inflationary(SetOperator.of(ListF(), u))
        if chain.closure_index != k + 1:
            bad.append(f"k={k}: closure {chain.closure_index}")
        for a in range(k + 3):
            if u.members(chain.at(a)) != [f"len{n}" for n in range(min(a, k + 1))]:
                bad.append(f"k={k}: iterate {a}")
    return not bad, "closure index k+1 for k=1..8" if not bad else "; ".join(bad)


def ac6():
    compared, bad = 0, []
    for path in POSITIVE:
        s = check_path(path)
        decls = [s.checked[n] for n in s.order]
        for name in main_candidates(decls, str(path)):
            for depth in range(1, 17):
                a = evaluate(s.signature, decls, name, depth, ERASED, fuel=10**6).tree
                b = evaluate(s.signature, decls, name, depth, TOKENS, fuel=10**6).tree
                compared += 1
                if a != b:
                    bad.append(f"{name}@{depth}")
    return not bad, f"{compared} observation pairs compared, {len(bad)} differ" + (f": {bad[:5]}" if bad else "")


def ac7():
    judgments = random_judgments(10_000, seed=99, relations=("leq", "ltMeasure"))
    res = audit_judgments(judgments)
    rng = random.Random(7)
    irreflexive_bad = transitive_bad = triples = 0
    for _ in range(200):
        ctx = random_context(rng)
        sizes = [random_size(rng, ctx) for _ in range(8)]
        lt = {(a, b): lt_measure(ctx, sa, sb) for a, sa in enumerate(sizes) for b, sb in enumerate(sizes)}
        irreflexive_bad += sum(lt[(a, a)] for a in range(len(sizes)))
        for a in range(len(sizes)):
            for b in range(len(sizes)):
                for c in range(len(sizes)):
                    if lt[(a, b)] and lt[(b, c)]:
                        triples += 1
                        transitive_bad += not lt[(a, c)]
    ok = res.total >= 10_000 and res.unsound == 0 and irreflexive_bad == 0 and transitive_bad == 0
    return ok, (
        f"{res.total} judgments, {res.unsound} unsound, {res.incomplete} incomplete; "
        f"irreflexivity violations {irreflexive_bad}, transitivity {transitive_bad}/{triples}"
    )


def ac8():
    s = check_path(CORPUS / "positive" / "sp_run.ma")
    problems, exact_seen = [], set()
    for n in range(1, 6):
        model = TypeModel(s.signature, n)
        for name in ("Stream", "SP"):
            for row in variance_table(model, name):
                if not row.sound or (row.observed is not None and not row.exact):
                    problems.append(f"{name}.{row.param} at |U|={n}: declared {row.declared}, observed {row.observed}")
                if row.exact:
                    exact_seen.add((name, row.param))
    expected = {("Stream", "A"), ("Stream", "i"), ("SP", "A"), ("SP", "B"), ("SP", "i"), ("SP", "j")}
    missing = expected - exact_seen
    ok = not problems and not missing
    detail = f"{len(expected - missing)}/{len(expected)} parameters confirmed exactly"
    if problems or missing:
        detail += "; " + "; ".join(problems + [f"{m} never observable" for m in sorted(missing)])
    return ok, detail


CRITERIA = [
    ("AC1", "positive corpus checks quickly", ac1),
    ("AC2", "negative corpus rejected with documented codes", ac2),
    ("AC3", "fib stream prefix", ac3),
    ("AC4", "iteration identities on random operators", ac4),
    ("AC5", "list functor closure index", ac5),
    ("AC6", "erasure coherence", ac6),
    ("AC7", "size order sound against valuations", ac7),
    ("AC8", "declared variances match brute force", ac8),
]


def _line(tag, title, ok, detail):
    return f"{tag} {'PASS' if ok else 'FAIL'} {title}: {detail}"


@pytest.mark.parametrize("tag,title,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(tag, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(tag, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for tag, title, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(_line(tag, title, ok, detail))
    sys.exit(1 if failed else 0)

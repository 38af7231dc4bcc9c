"""Fixed corpus of small networks used across the test suite.

Structures cover chains, trees, a collider, independent components and a
ten-variable tree with one two-parent family; cardinalities range 2-4.
Random tables are generated from fixed seeds so the corpus is stable.
"""

import numpy as np

from bnmonitor import NetworkModel


def fair_coin():
    return NetworkModel.build([("C", ["c0", "c1"])], {}, {"C": [[0.5, 0.5]]})


def biased_coin():
    return NetworkModel.build([("C", ["c0", "c1"])], {}, {"C": [[0.8, 0.2]]})


def two_fair_coins():
    return NetworkModel.build(
        [("A", ["a0", "a1"]), ("B", ["b0", "b1"])],
        {},
        {"A": [[0.5, 0.5]], "B": [[0.5, 0.5]]},
    )


def ab_net():
    """The reference two-variable net used in most worked examples."""
    return NetworkModel.build(
        [("A", ["a0", "a1"]), ("B", ["b0", "b1"])],
        {"B": ["A"]},
        {"A": [[0.5, 0.5]], "B": [[0.9, 0.1], [0.1, 0.9]]},
    )


def chain3():
    return NetworkModel.build(
        [("A", ["a0", "a1"]), ("B", ["b0", "b1"]), ("C", ["c0", "c1"])],
        {"B": ["A"], "C": ["B"]},
        {
            "A": [[0.6, 0.4]],
            "B": [[0.7, 0.3], [0.2, 0.8]],
            "C": [[0.9, 0.1], [0.4, 0.6]],
        },
    )


def collider():
    """A and B fair, C depends on both with a matched/mismatched 0.9/0.1 table."""
    rows = []
    for a in range(2):
        for b in range(2):
            rows.append([0.9, 0.1] if a == b else [0.1, 0.9])
    return NetworkModel.build(
        [("A", ["a0", "a1"]), ("B", ["b0", "b1"]), ("C", ["c0", "c1"])],
        {"C": ["A", "B"]},
        {"A": [[0.5, 0.5]], "B": [[0.5, 0.5]], "C": rows},
    )


def collider_structure_dropped_arc():
    """Same variables as collider() but without the B -> C arc."""
    return NetworkModel.build(
        [("A", ["a0", "a1"]), ("B", ["b0", "b1"]), ("C", ["c0", "c1"])],
        {"C": ["A"]},
        {"A": [[0.5, 0.5]], "B": [[0.5, 0.5]], "C": [[0.5, 0.5], [0.5, 0.5]]},
    )


def _random_cpt(rng, rows, card):
    table = rng.uniform(0.1, 1.0, size=(rows, card))
    return table / table.sum(axis=1, keepdims=True)


def tree_mixed():
    rng = np.random.default_rng(11)
    variables = [
        ("R", ["r0", "r1", "r2"]),
        ("S", ["s0", "s1"]),
        ("T", ["t0", "t1", "t2", "t3"]),
        ("U", ["u0", "u1"]),
    ]
    parents = {"S": ["R"], "T": ["R"], "U": ["S"]}
    cpts = {
        "R": [[0.5, 0.3, 0.2]],
        "S": _random_cpt(rng, 3, 2),
        "T": _random_cpt(rng, 3, 4),
        "U": _random_cpt(rng, 2, 2),
    }
    return NetworkModel.build(variables, parents, cpts)


def chain_mixed():
    rng = np.random.default_rng(12)
    variables = [
        ("A", ["a0", "a1", "a2", "a3"]),
        ("B", ["b0", "b1", "b2"]),
        ("C", ["c0", "c1"]),
    ]
    parents = {"B": ["A"], "C": ["B"]}
    cpts = {
        "A": _random_cpt(rng, 1, 4),
        "B": _random_cpt(rng, 4, 3),
        "C": _random_cpt(rng, 3, 2),
    }
    return NetworkModel.build(variables, parents, cpts)


def naive():
    rng = np.random.default_rng(13)
    variables = [
        ("K", ["k0", "k1", "k2"]),
        ("F1", ["f0", "f1"]),
        ("F2", ["g0", "g1", "g2"]),
        ("F3", ["h0", "h1"]),
    ]
    parents = {"F1": ["K"], "F2": ["K"], "F3": ["K"]}
    cpts = {
        "K": _random_cpt(rng, 1, 3),
        "F1": _random_cpt(rng, 3, 2),
        "F2": _random_cpt(rng, 3, 3),
        "F3": _random_cpt(rng, 3, 2),
    }
    return NetworkModel.build(variables, parents, cpts)


def wide10():
    """Ten binary variables: a tree plus one two-parent family (V9)."""
    rng = np.random.default_rng(14)
    names = [f"V{i}" for i in range(10)]
    variables = [(n, ["0", "1"]) for n in names]
    parents = {
        "V1": ["V0"],
        "V2": ["V0"],
        "V3": ["V1"],
        "V4": ["V1"],
        "V5": ["V2"],
        "V6": ["V2"],
        "V7": ["V3"],
        "V8": ["V4"],
        "V9": ["V5", "V6"],
    }
    cpts = {}
    for n in names:
        rows = 1
        for p in parents.get(n, ()):
            rows *= 2
        cpts[n] = _random_cpt(rng, rows, 2)
    return NetworkModel.build(variables, parents, cpts)


CORPUS = [
    ("fair_coin", fair_coin),
    ("biased_coin", biased_coin),
    ("two_fair_coins", two_fair_coins),
    ("ab_net", ab_net),
    ("chain3", chain3),
    ("collider", collider),
    ("tree_mixed", tree_mixed),
    ("chain_mixed", chain_mixed),
    ("naive", naive),
    ("wide10", wide10),
]


def corpus_models():
    return [(name, builder()) for name, builder in CORPUS]

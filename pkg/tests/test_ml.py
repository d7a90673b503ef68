from __future__ import annotations

import itertools
import random
from collections import namedtuple
from types import SimpleNamespace

import numpy as np
import pytest
import torch

from advcontract.ml import (
    CLS,
    PAD,
    UNK,
    CandidateModel,
    MetaModel,
    TransformerConfig,
    adasyn,
    adasyn_plan,
    build_vocab,
    chrono_split,
    evaluate,
    expanding_window_cv,
    permutation_importance,
    rank_reports,
    train_candidate,
    train_meta,
    train_transformer,
)
from advcontract.ml import weights
from advcontract.ml.ensemble import META_KINDS, check_meta_input
from advcontract.ml.knn import KNN
from advcontract.ml.linear import LinearSVM, LogisticRegression, logistic_loss_and_grad
from advcontract.ml.transformer import EncoderClassifier, TransformerClassifier
from advcontract.ml.tree import DecisionTree, GradientBoostedTrees, RandomForest

# vocabulary


def test_vocab_single_doc():
    v = build_vocab(["A.b()"])
    assert {"A", ".", "b", "(", ")"} <= set(v.tokens)
    assert (v.tokens[PAD], v.tokens[UNK], v.tokens[CLS]) == ("<pad>", "<unk>", "<cls>")


def test_vocab_min_frequency_and_order():
    v = build_vocab(["a a b c", "a c ; ->"], min_frequency=2)
    assert v.tokens[3:] == ("a", "c")
    assert v.encode("b a") == [CLS, UNK, v.id_of("a")]
    assert build_vocab(["a a b c", "a c ; ->"], 2) == v
    assert v.digest() == build_vocab(["a a b c", "a c ; ->"], 2).digest()


def test_vocab_arrow_and_args_tokens():
    v = build_vocab(["BB_0_0 -> BB_0_1\nBB_0_0: U.f(...args)"])
    assert "->" in v.tokens and "...args" in v.tokens and ":" in v.tokens


def test_vocab_empty_corpus():
    with pytest.raises(ValueError):
        build_vocab([])


# metrics


def brute_counts(pred, y):
    c = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for p, t in zip(pred, y):
        c[("t" if p == t else "f") + ("p" if p == 1 else "n")] += 1
    return c


def confusion(tp, fp, fn, tn=100):
    pred = [1] * tp + [1] * fp + [0] * fn + [0] * tn
    y = [1] * tp + [0] * fp + [1] * fn + [0] * tn
    return evaluate(pred, y)


def test_reported_knn_row():
    r = confusion(65, 5, 10)
    assert r.precision == pytest.approx(0.9286, abs=1e-4)
    assert r.recall == pytest.approx(0.8667, abs=1e-4)
    assert r.f1 == pytest.approx(0.8966, abs=1e-4)


def test_reported_boosted_trees_row():
    r = confusion(65, 13, 9)
    assert r.precision == pytest.approx(0.8333, abs=1e-4)
    assert r.recall == pytest.approx(0.8784, abs=1e-4)
    assert r.f1 == pytest.approx(0.8553, abs=1e-4)


def test_metrics_against_brute_force():
    rng = random.Random(3)
    for _ in range(1000):
        n = rng.randint(1, 60)
        y = [rng.randint(0, 1) for _ in range(n)]
        p = [rng.random() for _ in range(n)]
        r = evaluate(p, y)
        c = brute_counts([int(x >= 0.5) for x in p], y)
        assert (r.tp, r.fp, r.tn, r.fn) == (c["tp"], c["fp"], c["tn"], c["fn"])
        assert r.accuracy == pytest.approx((c["tp"] + c["tn"]) / n)
        pp = c["tp"] + c["fp"]
        assert r.precision == (c["tp"] / pp if pp else 0.0)
        neg = c["fp"] + c["tn"]
        assert r.fpr == (c["fp"] / neg if neg else 0.0)
        # flipping both predictions and labels swaps precision with NPV
        s = evaluate([1 - int(x >= 0.5) for x in p], [1 - t for t in y])
        assert s.precision == pytest.approx(r.npv) and s.npv == pytest.approx(r.precision)


def test_metrics_all_correct_and_errors():
    r = evaluate([1, 0, 1], [1, 0, 1])
    assert (r.precision, r.recall, r.f1, r.fpr) == (1, 1, 1, 0)
    assert evaluate([0, 0], [0, 0]).f1 == 0.0
    with pytest.raises(ValueError):
        evaluate([], [])
    with pytest.raises(ValueError):
        evaluate([1], [1, 0])


# ADASYN


def hand_adasyn(maj, mino, k, beta):
    """Step the formulas by hand on 1-D data with plain Python."""
    pts = [(v, 0) for v in maj] + [(v, 1) for v in mino]
    G = (len(maj) - len(mino)) * beta
    r = []
    for x in mino:
        others = sorted((abs(x - v), i, lab) for i, (v, lab) in enumerate(pts) if v != x)
        r.append(sum(lab == 0 for _, _, lab in others[:k]) / k)
    if sum(r) == 0:
        return G, r, [int(G / len(mino) + 0.5)] * len(mino)
    return G, r, [int(ri / sum(r) * G + 0.5) for ri in r]


MAJ = [round(0.1 * i, 1) for i in range(9)]


def test_adasyn_fallback_fixture():
    X = np.array(MAJ + [1.0, 1.1])[:, None]
    y = np.array([0] * 9 + [1, 1])
    G, r, g = hand_adasyn(MAJ, [1.0, 1.1], 1, 1.0)
    assert (G, r, g) == (7.0, [0.0, 0.0], [4, 4])
    plan = adasyn_plan(X, y, 1.0, 1)
    assert plan.fallback and plan.G == G and plan.counts.tolist() == g
    X2, y2 = adasyn(X, y, 1.0, 1, seed=0)
    assert len(X2) == 11 + 8 and (X2[:11] == X).all() and y2[11:].tolist() == [1] * 8
    assert ((X2[11:] >= 1.0) & (X2[11:] <= 1.1)).all()


def test_adasyn_borderline_fixture():
    mino = [0.85, 1.0, 1.1]
    X = np.array(MAJ + mino)[:, None]
    y = np.array([0] * 9 + [1] * 3)
    G, r, g = hand_adasyn(MAJ, mino, 1, 1.0)
    assert (G, r, g) == (6.0, [1.0, 0.0, 0.0], [6, 0, 0])
    plan = adasyn_plan(X, y, 1.0, 1)
    assert not plan.fallback and plan.counts.tolist() == g
    X2, _ = adasyn(X, y, 1.0, 1, seed=1)
    s = X2[12:, 0]
    # the only minority neighbour of 0.85 is 1.0
    assert len(s) == 6 and ((s >= 0.85) & (s <= 1.0)).all()


def test_adasyn_balanced_is_identity():
    X = np.arange(6.0)[:, None]
    y = np.array([0, 1, 0, 1, 0, 1])
    X2, y2 = adasyn(X, y, 1.0, 2)
    assert (X2 == X).all() and (y2 == y).all()


def test_adasyn_errors():
    with pytest.raises(ValueError):
        adasyn(np.zeros((3, 1)), np.array([0, 0, 1]), 1.0, 1)
    with pytest.raises(ValueError):
        adasyn(np.arange(5.0)[:, None], np.array([0, 0, 1, 1, 1]), 1.0, 3)


def on_segment(s, a, b, tol=1e-9):
    d = b - a
    dd = d @ d
    if dd == 0:
        return np.allclose(s, a, atol=tol)
    lam = (s - a) @ d / dd
    return -tol <= lam <= 1 + tol and np.allclose(a + lam * d, s, atol=1e-7)


def test_adasyn_segment_membership_10k():
    rng = np.random.default_rng(11)
    total = 0
    trial = 0
    while total < 10_000:
        n_maj, n_min, d, k = 400, int(rng.integers(8, 30)), int(rng.integers(1, 5)), 5
        X = np.vstack([rng.normal(0, 1, (n_maj, d)), rng.normal(1.2, 1, (n_min, d))])
        y = np.array([0] * n_maj + [1] * n_min)
        X2, y2 = adasyn(X, y, 1.0, k, seed=trial)
        plan = adasyn_plan(X, y, 1.0, k)
        syn = X2[len(X) :]
        G = (n_maj - n_min) * 1.0
        assert len(syn) == plan.counts.sum()
        assert np.floor(G) - n_min <= len(syn) <= np.ceil(G) + n_min
        Xm = X[y == 1]
        # brute-force minority neighbour sets
        nbrs = []
        for i in range(n_min):
            dist = sorted((float(np.sum((Xm[j] - Xm[i]) ** 2)), j) for j in range(n_min) if j != i)
            nbrs.append([j for _, j in dist[:k]])
        src = np.repeat(np.arange(n_min), plan.counts)
        for s, i in zip(syn, src):
            assert any(on_segment(s, Xm[i], Xm[z]) for z in nbrs[i])
        total += len(syn)
        trial += 1
    assert total >= 10_000


# candidates


def test_lr_gradient_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 5))
    y = (rng.random(40) < 0.4).astype(int)
    p = rng.normal(size=6)
    _, g = logistic_loss_and_grad(p, X, y, 0.1)
    num = np.zeros_like(p)
    for i in range(len(p)):
        e = np.zeros_like(p)
        e[i] = 1e-6
        num[i] = (logistic_loss_and_grad(p + e, X, y, 0.1)[0] - logistic_loss_and_grad(p - e, X, y, 0.1)[0]) / 2e-6
    rel = np.linalg.norm(g - num) / max(np.linalg.norm(g) + np.linalg.norm(num), 1e-12)
    assert rel < 1e-6


def test_lr_separable():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(100, 2))
    y = (X[:, 0] + 2 * X[:, 1] > 0).astype(int)
    X = X + np.where(y[:, None] == 1, 0.3, -0.3) * np.array([1, 2]) / np.sqrt(5)
    m = train_candidate("LR", X, y)
    assert evaluate(m.predict_proba(X), y).accuracy == 1.0


XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


def best_linear_xor_accuracy():
    """Enumerate all 16 labelings; keep those a line can realise (checked via a
    sign-vector search over a dense grid of directions and offsets)."""
    best = 0
    for ang in np.linspace(0, 2 * np.pi, 721):
        w = np.array([np.cos(ang), np.sin(ang)])
        proj = XOR_X @ w
        for b in np.concatenate([proj - 1e-6, proj + 1e-6]):
            pred = (proj > b).astype(int)
            best = max(best, int((pred == XOR_Y).sum()))
    return best / 4


def test_dt_xor_vs_lr():
    X = np.repeat(XOR_X, 5, axis=0)
    y = np.repeat(XOR_Y, 5)
    assert best_linear_xor_accuracy() == 0.75
    dt = train_candidate("DT", X, y, {"max_depth": 2, "min_samples_leaf": 1})
    lr = train_candidate("LR", X, y)
    assert evaluate(dt.predict_proba(X), y).accuracy == 1.0
    assert evaluate(lr.predict_proba(X), y).accuracy <= 0.75


def test_dt_matches_sklearn_shallow():
    from sklearn.tree import DecisionTreeClassifier

    # shallow trees on continuous data: no exact gain ties, so sklearn's random
    # feature order cannot pick a different split
    rng = np.random.default_rng(4)
    f32 = lambda a: a.astype(np.float32).astype(np.float64)  # noqa: E731  sklearn works in float32
    for trial in range(10):
        X = f32(rng.normal(size=(200, 4)))
        y = ((X[:, 0] > 0.2) ^ (X[:, 1] * X[:, 2] > 0.1)).astype(int)
        Xt = f32(rng.normal(size=(300, 4)))
        ours = DecisionTree(max_depth=2).fit(X, y)
        ref = DecisionTreeClassifier(max_depth=2, random_state=0).fit(X, y)
        np.testing.assert_allclose(ours.predict_proba(Xt), ref.predict_proba(Xt)[:, 1], atol=1e-12)


def reference_cart(rows, labels, depth):
    """Plain recursive CART: textbook Gini, ties to the lowest (feature, threshold)."""

    def gini(ys):
        n = len(ys)
        p = sum(ys) / n
        return n * (1 - p * p - (1 - p) ** 2)

    def grow(idx, d):
        ys = [labels[i] for i in idx]
        leaf = sum(ys) / len(ys)
        if d == 0 or len(set(ys)) == 1 or len(idx) < 2:
            return leaf
        best = None
        for f in range(len(rows[0])):
            vals = sorted({rows[i][f] for i in idx})
            for a, b in zip(vals, vals[1:]):
                t = (a + b) / 2
                L = [i for i in idx if rows[i][f] <= t]
                R = [i for i in idx if rows[i][f] > t]
                imp = gini([labels[i] for i in L]) + gini([labels[i] for i in R])
                if best is None or imp < best[0] - 1e-9:
                    best = (imp, f, t, L, R)
        if best is None:
            return leaf
        _, f, t, L, R = best
        return (f, t, grow(L, d - 1), grow(R, d - 1))

    return grow(list(range(len(rows))), depth)


def reference_predict(node, x):
    while isinstance(node, tuple):
        f, t, l, r = node
        node = l if x[f] <= t else r
    return node


def test_dt_matches_reference_cart():
    rng = np.random.default_rng(44)
    for trial in range(15):
        X = rng.integers(0, 6, size=(60, 3)).astype(float)
        y = ((X[:, 0] + rng.integers(0, 3, 60) > 3) ^ (X[:, 2] > 3)).astype(int)
        if len(set(y)) < 2:
            continue
        ref = reference_cart(X.tolist(), y.tolist(), 4)
        ours = DecisionTree(max_depth=4).fit(X, y)
        grid = np.array(list(itertools.product(np.arange(-0.5, 6.5, 0.5), repeat=3)))
        want = np.array([reference_predict(ref, x) for x in grid.tolist()])
        np.testing.assert_allclose(ours.predict_proba(grid), want, atol=1e-12)


def test_rf_single_tree_equals_dt():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(150, 6))
    y = (X[:, 0] - X[:, 3] > 0.1).astype(int)
    rf = RandomForest(n_trees=1, max_depth=5, max_features=None, bootstrap=False).fit(X, y)
    dt = DecisionTree(max_depth=5).fit(X, y)
    Xt = rng.normal(size=(100, 6))
    assert (rf.predict_proba(Xt) == dt.predict_proba(Xt)).all()


def test_rf_seeded_reproducible():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(150, 6))
    y = (X[:, 0] > 0).astype(int)
    a = RandomForest(n_trees=10, seed=3).fit(X, y).predict_proba(X)
    b = RandomForest(n_trees=10, seed=3).fit(X, y).predict_proba(X)
    assert (a == b).all()


def hand_stage(X, y, lam):
    """One boosting stage by brute force: initial log-odds, gradients, best depth-1 split."""
    p0 = y.mean()
    F0 = np.log(p0 / (1 - p0))
    p = 1 / (1 + np.exp(-F0))
    g, h = p - y, np.full(len(y), p * (1 - p))
    score = lambda G, H: G * G / (H + lam)  # noqa: E731
    best = (0.0, None)
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f]))
        for a, b in zip(vals, vals[1:]):
            t = (a + b) / 2
            L = X[:, f] <= t
            gain = score(g[L].sum(), h[L].sum()) + score(g[~L].sum(), h[~L].sum()) - score(g.sum(), h.sum())
            if gain > best[0] + 1e-12:
                best = (gain, (f, t))
    f, t = best[1]
    L = X[:, f] <= t
    wl, wr = -g[L].sum() / (h[L].sum() + lam), -g[~L].sum() / (h[~L].sum() + lam)
    return lambda Z: F0 + np.where(Z[:, f] <= t, wl, wr)


def test_gbt_single_stage_matches_hand_step():
    rng = np.random.default_rng(7)
    for _ in range(5):
        X = rng.normal(size=(60, 3)).round(2)
        y = (X[:, 1] + 0.3 * rng.normal(size=60) > 0).astype(int)
        m = GradientBoostedTrees(n_rounds=1, learning_rate=1.0, max_depth=1, lam=1.0).fit(X, y)
        Xt = rng.normal(size=(50, 3))
        np.testing.assert_allclose(m.decision_function(Xt), hand_stage(X, y, 1.0)(Xt), atol=1e-12)


def test_gbt_fits_nonlinear():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(300, 2))
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
    assert evaluate(train_candidate("GBT", X, y).predict_proba(X), y).accuracy > 0.97


def test_knn_matches_sklearn():
    from sklearn.neighbors import KNeighborsClassifier

    rng = np.random.default_rng(9)
    X = rng.normal(size=(120, 3))
    y = (X.sum(axis=1) > 0).astype(int)
    Xt = rng.normal(size=(80, 3))
    ours = KNN(5).fit(X, y).predict_proba(Xt)
    ref = KNeighborsClassifier(5).fit(X, y).predict_proba(Xt)[:, 1]
    np.testing.assert_allclose(ours, ref)


def test_knn_even_k_tie_uses_distance():
    X = np.array([[0.0], [1.0], [3.0], [10.0]])
    y = np.array([1, 0, 0, 1])
    m = KNN(2).fit(X, y)
    # neighbours of 0.4: 0.0 (pos, 0.4) and 1.0 (neg, 0.6): positive is closer
    assert m.predict([[0.4]])[0] == 1
    # neighbours of 0.7: 1.0 (neg, 0.3) and 0.0 (pos, 0.7): negative is closer
    assert m.predict([[0.7]])[0] == 0


def test_svm_separable_and_calibrated():
    rng = np.random.default_rng(10)
    X = np.vstack([rng.normal(-2, 0.5, (50, 2)), rng.normal(2, 0.5, (50, 2))])
    y = np.array([0] * 50 + [1] * 50)
    m = LinearSVM().fit(X, y)
    p = m.predict_proba(X)
    assert evaluate(p, y).accuracy == 1.0
    assert ((p >= 0) & (p <= 1)).all()
    order = np.argsort(m.decision_function(X))
    assert (np.diff(p[order]) >= 0).all()


@pytest.mark.parametrize("kind", ["LR", "DT", "RF", "GBT"])
def test_candidate_single_class_error(kind):
    with pytest.raises(ValueError):
        train_candidate(kind, np.zeros((4, 2)), np.zeros(4))


@pytest.mark.parametrize("cls", [LogisticRegression, DecisionTree, RandomForest, GradientBoostedTrees, LinearSVM, KNN])
def test_state_round_trip_through_acwt(cls):
    rng = np.random.default_rng(12)
    X = rng.normal(size=(80, 3))
    y = (X[:, 0] > 0).astype(int)
    kw = {"n_trees": 3} if cls is RandomForest else {"n_rounds": 5} if cls is GradientBoostedTrees else {}
    m = cls(**kw).fit(X, y)
    cfg, arrays = m.get_state()
    back = cls.from_state(cfg, weights.loads(weights.dumps(arrays)))
    assert (back.predict_proba(X) == m.predict_proba(X)).all()


def test_acwt_layout():
    blob = weights.dumps({"b": np.array([1.5], dtype=np.float32), "a": np.arange(3)})
    assert blob[:4] == b"ACWT"
    assert int.from_bytes(blob[4:8], "little") == 1 and int.from_bytes(blob[8:12], "little") == 2
    # first entry is "a" (sorted): name_len=1, 'a', dtype=3 (int64), ndim=1, shape=3
    assert blob[12:14] == b"\x01\x00" and blob[14:15] == b"a" and blob[15:17] == b"\x03\x01"
    assert int.from_bytes(blob[17:25], "little") == 3
    assert int.from_bytes(blob[25:33], "little") == 0
    out = weights.loads(blob)
    assert out["a"].tolist() == [0, 1, 2] and out["b"].dtype == np.float32
    with pytest.raises(ValueError):
        weights.loads(blob + b"\x00")


# candidate selection

R = namedtuple("R", "f1 recall fpr")


def test_select_argmax_f1():
    reps = {"LR": R(0.5, 1, 0), "DT": R(0.9, 0.5, 0), "RF": R(0.7, 1, 0), "GBT": R(0.7, 1, 0)}
    assert rank_reports(reps)[0] == "DT"


def test_select_recall_tiebreak():
    reps = {"LR": R(0.8, 0.8, 0), "DT": R(0.8, 0.9, 0.5)}
    assert rank_reports(reps)[0] == "DT"


def test_select_fpr_then_fixed_order():
    assert rank_reports({"RF": R(0.8, 0.8, 0.1), "GBT": R(0.8, 0.8, 0.0)})[0] == "GBT"
    same = R(0.8, 0.8, 0.1)
    assert rank_reports({"GBT": same, "RF": same, "DT": same, "LR": same}) == ["LR", "DT", "RF", "GBT"]


# meta models


def test_meta_aligned_every_kind():
    rng = np.random.default_rng(13)
    y = rng.integers(0, 2, 60)
    y[:2] = [0, 1]
    P = np.stack([y.astype(float), rng.random(60)], axis=1)
    for kind in META_KINDS:
        m = train_meta(kind, P, y)
        assert evaluate(m.predict_proba(P), y).accuracy == 1.0, kind


def test_meta_knn_k1_identity():
    rng = np.random.default_rng(14)
    P = rng.random((50, 2))
    y = rng.integers(0, 2, 50)
    y[:2] = [0, 1]
    m = train_meta("KNN", P, y, {"k": 1})
    assert evaluate(m.predict_proba(P), y).accuracy == 1.0


def test_meta_quadrant_beats_bases():
    # label 1 only when both bases agree; each base alone is wrong on its own off-diagonal quadrant
    grid = [(a, b) for a in (0.1, 0.3, 0.7, 0.9) for b in (0.1, 0.3, 0.7, 0.9)]
    P = np.array(grid * 3)
    y = ((P[:, 0] > 0.5) & (P[:, 1] > 0.5)).astype(int)
    wrong_c = {i for i in range(len(y)) if int(P[i, 0] >= 0.5) != y[i]}
    wrong_t = {i for i in range(len(y)) if int(P[i, 1] >= 0.5) != y[i]}
    assert wrong_c and wrong_t and not wrong_c & wrong_t
    base_f1 = max(evaluate(P[:, 0], y).f1, evaluate(P[:, 1], y).f1)
    assert base_f1 == pytest.approx(2 / 3)
    m = train_meta("DT", P, y)
    assert evaluate(m.predict_proba(P), y).f1 > base_f1


def test_meta_input_checks():
    with pytest.raises(ValueError):
        check_meta_input(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        check_meta_input([[0.2, 1.5]])
    with pytest.raises(ValueError):
        train_meta("KNN", np.zeros((4, 3)), [0, 1, 0, 1])


# splits


def rec(t, cid=None, label=0):
    return SimpleNamespace(deploy_timestamp=t, contract_id=cid or f"c{t}", label=label)


def test_chrono_split_example():
    rs = [rec(t) for t in range(10, 0, -1)]
    base, meta, test = chrono_split(rs)
    assert [r.deploy_timestamp for r in base] == [1, 2, 3, 4, 5, 6]
    assert [r.deploy_timestamp for r in meta] == [7, 8]
    assert [r.deploy_timestamp for r in test] == [9, 10]


def test_chrono_split_duplicates_and_errors():
    rs = [rec(1, c) for c in "edcba"] + [rec(2, c) for c in "zyx"] + [rec(3, "q"), rec(3, "p")]
    a = chrono_split(rs)
    b = chrono_split(list(reversed(rs)))
    assert [[r.contract_id for r in part] for part in a] == [[r.contract_id for r in part] for part in b]
    with pytest.raises(ValueError):
        chrono_split(rs[:4])


def test_no_leakage_on_random_datasets():
    rng = random.Random(21)
    for _ in range(100):
        n = rng.randint(10, 200)
        rs = [rec(rng.randint(0, 50), f"c{i}", rng.randint(0, 1)) for i in range(n)]
        base, meta, test = chrono_split(rs)
        ids = [{id(r) for r in p} for p in (base, meta, test)]
        assert not ids[0] & ids[1] and not ids[0] & ids[2] and not ids[1] & ids[2]
        assert sum(map(len, ids)) == n
        assert max(r.deploy_timestamp for r in base + meta) <= min(r.deploy_timestamp for r in test)
        assert max(r.deploy_timestamp for r in base) <= min(r.deploy_timestamp for r in meta)
        res = expanding_window_cv(rs, lambda tr: (lambda te: np.full(len(te), 0.5)), 5)
        for f in res.folds:
            assert f.train_max_time <= f.test_min_time


def test_expanding_window_five_splits():
    rs = [rec(t, label=t % 2) for t in range(50)]
    seen = []

    def trainer(train):
        seen.append([r.deploy_timestamp for r in train])
        return lambda test: np.array([r.label for r in test], dtype=float)

    res = expanding_window_cv(rs, trainer, 5)
    assert len(res.folds) == 4 and [f.train_size for f in res.folds] == [10, 20, 30, 40]
    assert all(f.test_size == 10 for f in res.folds)
    assert seen[0] == list(range(10)) and res.mean_f1 == 1.0
    assert len(expanding_window_cv(rs, trainer, 2).folds) == 1


def test_expanding_window_skips_single_class_fold():
    rs = [rec(t, label=int(t >= 30)) for t in range(50)]
    res = expanding_window_cv(rs, lambda tr: (lambda te: np.ones(len(te))), 5)
    assert len(res.reports) == 1 and len(res.diagnostics) == 3


# permutation importance


def test_importance_ignored_and_perfect_features():
    rng = np.random.default_rng(15)
    X = rng.normal(size=(200, 3))
    y = (X[:, 1] > 0).astype(int)
    m = LogisticRegression()
    m.coef, m.intercept = np.array([0.0, 5.0, 0.0]), 0.0
    imp = permutation_importance(m, X, y, repeats=5, seed=1)
    assert imp[0] == 0.0 and imp[2] == 0.0 and imp[1] > 0.3
    assert (permutation_importance(m, X, y, repeats=5, seed=1) == imp).all()


# transformer


def toy_docs(n, seed=0):
    rng = random.Random(seed)
    filler = ["Token.transfer", "Pair.swap", "InternalFunction_0", "BB_0_1 -> BB_0_2", "Token.approve"]
    docs, ys = [], []
    for i in range(n):
        body = " ; ".join(rng.choice(filler) for _ in range(rng.randint(3, 8)))
        lab = i % 2
        if lab:
            body += " ; Pool.flashMarker(...args)"
        docs.append(f"function f\nBB_0_0: {body}")
        ys.append(lab)
    return docs, ys


def test_transformer_overfits_toy_set():
    docs, ys = toy_docs(32)
    cfg = TransformerConfig(d_model=16, heads=2, layers=1, dropout=0.0, epochs=200, patience=200,
                            batch_size=8, lr=3e-3, seed=0)
    m = train_transformer(docs, ys, docs, ys, cfg)
    acc = evaluate(m.predict_proba(docs), ys).accuracy
    assert acc == 1.0
    assert len(m.history) <= 200


def grad_check_model():
    torch.manual_seed(0)
    docs, _ = toy_docs(6, seed=2)
    vocab = build_vocab(docs)
    cfg = TransformerConfig(d_model=8, heads=2, layers=2, dropout=0.0, max_len=32)
    net = EncoderClassifier(len(vocab), cfg).double()
    net.train()
    ids = torch.from_numpy(vocab.batch(docs, 32))
    y = torch.tensor([0.0, 1.0, 0.0, 1.0, 1.0, 0.0], dtype=torch.float64)
    return net, ids, y


def test_transformer_gradient_finite_differences():
    net, ids, y = grad_check_model()

    def loss():
        return torch.nn.functional.binary_cross_entropy_with_logits(net(ids), y)

    net.zero_grad()
    loss().backward()
    worst = 0.0
    with torch.no_grad():
        for name, p in net.named_parameters():
            analytic = p.grad.detach().clone().reshape(-1)
            flat = p.data.reshape(-1)
            numeric = torch.zeros_like(analytic)
            for i in range(flat.numel()):
                old = flat[i].item()
                flat[i] = old + 1e-6
                lp = loss().item()
                flat[i] = old - 1e-6
                lm = loss().item()
                flat[i] = old
                numeric[i] = (lp - lm) / 2e-6
            denom = max(float(analytic.norm() + numeric.norm()), 1e-10)
            rel = float((analytic - numeric).norm()) / denom
            if analytic.norm() + numeric.norm() > 1e-8:
                worst = max(worst, rel)
                assert rel < 1e-4, (name, rel)
    assert worst < 1e-4


def test_transformer_padding_invariance_and_determinism():
    docs, ys = toy_docs(16)
    cfg = TransformerConfig(d_model=16, heads=2, layers=2, dropout=0.3, epochs=2, batch_size=8, seed=1)
    m = train_transformer(docs, ys, docs, ys, cfg)
    ids = m.ids(docs[:3])
    padded = torch.cat([ids, torch.full((3, 7), PAD)], dim=1)
    m.module.eval()
    with torch.no_grad():
        a, b = m.module(ids), m.module(padded)
    torch.testing.assert_close(a, b, atol=1e-5, rtol=0)
    p1, p2 = m.predict_proba(docs), m.predict_proba(docs)
    assert (p1 == p2).all() and ((p1 >= 0) & (p1 <= 1)).all()
    # single-document batches give the same answer as mixed-length batches
    single = np.concatenate([m.predict_proba([d]) for d in docs])
    np.testing.assert_allclose(single, p1, atol=1e-5)


def test_transformer_seeded_reproducible_and_round_trip():
    docs, ys = toy_docs(16)
    cfg = TransformerConfig(d_model=16, heads=2, layers=1, epochs=3, batch_size=8, seed=4)
    a = train_transformer(docs, ys, docs, ys, cfg)
    b = train_transformer(docs, ys, docs, ys, cfg)
    ca, wa = a.get_state()
    cb, wb = b.get_state()
    assert ca == cb and all((wa[k] == wb[k]).all() for k in wa)
    back = TransformerClassifier.from_state(ca, weights.loads(weights.dumps(wa)))
    assert (back.predict_proba(docs) == a.predict_proba(docs)).all()


def test_transformer_single_class_error():
    docs, _ = toy_docs(4)
    with pytest.raises(ValueError):
        train_transformer(docs, [1, 1, 1, 1], docs, [1, 1, 1, 1], TransformerConfig(d_model=8, heads=2))


# predict_contract


def test_predict_contract_extremes_and_mismatch():
    from advcontract.features import DeploymentFeatures, FeatureRecord, ImplementationFeatures, fit_normalizer
    from advcontract.labels import FundSourceCategory
    from advcontract.ml import predict_contract

    recs = [FeatureRecord(f"c{i}", DeploymentFeatures(i, FundSourceCategory.SAFE, False, 10, 10, True),
                          ImplementationFeatures(), pscft="function f\n", label=i % 2) for i in range(4)]
    stats = fit_normalizer(recs)
    docs = [r.pscft for r in recs]
    tr = train_transformer(docs, [0, 1, 0, 1], docs, [0, 1, 0, 1], TransformerConfig(d_model=8, heads=2, epochs=1))

    class Const:
        def __init__(self, p):
            self.p = p

        def predict_proba(self, X):
            return np.full(len(X), self.p)

    P = np.array([[0, 0], [1, 1], [0.1, 0.1], [0.9, 0.9]] * 5, dtype=float)
    y = (P[:, 0] > 0.5).astype(int)
    meta = train_meta("KNN", P, y, normalizer_digest=stats.digest(), vocab_digest=tr.vocab.digest())
    for pc, expect in ((1.0, 1), (0.0, 0)):
        # force the transformer to agree with the candidate by swapping in a constant head
        tr_const = SimpleNamespace(vocab=tr.vocab, predict_proba=lambda d, p=pc: np.full(len(d), p))
        pred = predict_contract(recs[0], CandidateModel("LR", Const(pc), stats.digest()), tr_const, meta, stats)
        assert pred.label_pred == expect and 0 <= pred.p_pred <= 1
    other = fit_normalizer(recs[:2] + [recs[0]])
    with pytest.raises(ValueError):
        predict_contract(recs[0], CandidateModel("LR", Const(1.0), stats.digest()), tr, meta, other)
    bad_meta = MetaModel("KNN", meta.model, stats.digest(), "0" * 64)
    with pytest.raises(ValueError):
        predict_contract(recs[0], CandidateModel("LR", Const(1.0), stats.digest()), tr, bad_meta, stats)


def test_all_probas_in_unit_interval():
    rng = np.random.default_rng(16)
    X = rng.normal(size=(100, 4)) * 10
    y = (X[:, 0] > 0).astype(int)
    for kind in ("LR", "DT", "RF", "GBT"):
        m = train_candidate(kind, X, y)
        p = m.predict_proba(rng.normal(size=(200, 4)) * 100)
        assert ((p >= 0) & (p <= 1)).all()
        assert (m.predict(X) == (m.predict_proba(X) >= 0.5)).all()
    for a, b in itertools.product([0.0, 1.0], repeat=2):
        assert 0 <= train_meta("SVM", np.array([[0, 0], [1, 1], [0.2, 0.1], [0.8, 0.9]]), [0, 1, 0, 1]).predict_proba([[a, b]])[0] <= 1

"""Independent brute-force oracles used to freeze expected test values.

Everything here recomputes quantities from first principles (materialized
pairs, explicit set algebra, literal formula transcriptions) and stays
independent of the code paths under test.
"""

from __future__ import annotations

import math
from itertools import combinations


def pairs_of(clusters: dict[str, set[str]]) -> set[frozenset]:
    out = set()
    for members in clusters.values():
        for a, b in combinations(sorted(members), 2):
            out.add(frozenset((a, b)))
    return out


def brute_pairwise(truth: dict[str, set[str]], pred: dict[str, set[str]]) -> tuple[float, float]:
    """Precision and recall by materializing every pair (small N only)."""
    t = pairs_of(truth)
    p = pairs_of(pred)
    common = t & p
    precision = len(common) / len(p) if p else 1.0
    recall = len(common) / len(t) if t else 1.0
    return precision, recall


def brute_f_beta(precision: float, recall: float, beta: float) -> float:
    if precision == 0.0 and recall == 0.0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * precision * recall / (b2 * precision + recall)


def cluster_lookup(clusters: dict[str, set[str]]) -> dict[str, str]:
    return {r: cid for cid, members in clusters.items() for r in members}


def brute_record_errors(truth: dict[str, set[str]], pred: dict[str, set[str]], record: str) -> dict:
    """EI/SDE/OCE/UCE/ROCE/RUCE/H of one record via explicit set algebra."""
    c = next(m for m in truth.values() if record in m)
    chat = next(m for m in pred.values() if record in m)
    a_r = chat - c
    b_r = c - chat
    return {
        "ei": 0 if chat == c else 1,
        "sde": len(chat) - len(c),
        "oce": len(a_r),
        "uce": len(b_r),
        "roce": len(a_r) / len(chat),
        "ruce": len(b_r) / len(c),
        "h": math.log(len(c & chat) / len(chat)),
    }


def brute_cluster_errors(truth: dict[str, set[str]], pred: dict[str, set[str]], cid: str) -> dict:
    members = sorted(truth[cid])
    recs = [brute_record_errors(truth, pred, r) for r in members]
    n = len(recs)
    return {k: sum(r[k] for r in recs) / n for k in recs[0]}


def brute_bcubed(truth: dict[str, set[str]], pred: dict[str, set[str]]) -> tuple[float, float]:
    """B3 precision/recall by the double-sum definition, equal cluster weight."""
    pred_of = cluster_lookup(pred)
    p_total = 0.0
    r_total = 0.0
    for members in truth.values():
        p_acc = 0.0
        r_acc = 0.0
        for r in members:
            chat = pred[pred_of[r]]
            common = len(members & chat)
            p_acc += common / len(chat)
            r_acc += common / len(members)
        p_total += p_acc / len(members)
        r_total += r_acc / len(members)
    return p_total / len(truth), r_total / len(truth)


def brute_cluster_pr(truth: dict[str, set[str]], pred: dict[str, set[str]]) -> tuple[float, float]:
    exact = sum(1 for m in truth.values() if any(m == q for q in pred.values()))
    return exact / len(pred), exact / len(truth)


def brute_homogeneity(truth: dict[str, set[str]], pred: dict[str, set[str]]) -> float:
    """1 - H(C|Chat)/H(C) by the direct double sum over intersections."""
    n = sum(len(m) for m in truth.values())
    h_truth = -sum((len(m) / n) * math.log(len(m) / n) for m in truth.values())
    h_cond = 0.0
    for c in truth.values():
        for chat in pred.values():
            common = len(c & chat)
            if common:
                h_cond -= (common / n) * math.log(common / len(chat))
    return 1.0 - h_cond / h_truth


def eq8_point(f: list[float], g: list[float]) -> float:
    """Literal transcription of the bias-adjusted ratio estimator."""
    k = len(f)
    fbar = sum(f) / k
    gbar = sum(g) / k
    adj = 1.0 + (1.0 / (k * (k - 1))) * sum(
        (g[i] / gbar) * (f[i] / fbar - g[i] / gbar) for i in range(k)
    )
    return (fbar / gbar) * adj


def eq9_var(f: list[float], g: list[float]) -> float:
    """Literal transcription of the variance estimator."""
    k = len(f)
    fbar = sum(f) / k
    gbar = sum(g) / k
    return (fbar / gbar) ** 2 * (1.0 / (k * (k - 1))) * sum(
        (g[i] / gbar - f[i] / fbar) ** 2 for i in range(k)
    )


def clusters_dict(clustering) -> dict[str, set[str]]:
    """Plain-dict view of a Clustering for the brute-force functions."""
    return {cid: set(members) for cid, members in clustering.clusters.items()}

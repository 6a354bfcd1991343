#!/usr/bin/env python3
"""Reference-definition oracle for the similarity metric.

Implements clipped n-gram precision with add-one numerator smoothing on
zero precisions, brevity penalty, 5:1 keyword weighting, multiset
intersection ratios for tree/data-flow components, and the
renormalized composite -- straight from the published definitions,
independent of the C++ implementation.

Modes:
  bleu        <json file>   token-list fixtures -> pinned BLEU values
  composite   <json file>   primitive dumps -> pinned composite values
"""
import json
import math
import sys
from collections import Counter


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(ref, cand, n_max=4, keywords=None, kw_weight=5.0):
    """Geometric mean of clipped n-gram precisions times brevity penalty.

    With `keywords`, every n-gram containing a keyword counts kw_weight times
    a plain n-gram, in both numerator and denominator.
    """
    if not ref or not cand:
        raise ValueError("empty token stream")
    logs = []
    for n in range(1, n_max + 1):
        cg = ngrams(cand, n)
        rg = ngrams(ref, n)
        if not cg:
            continue  # no candidate n-grams at this order: skip the order
        def w(gram):
            if keywords is None:
                return 1.0
            return kw_weight if any(t in keywords for t in gram) else 1.0
        num = sum(w(g) * min(c, rg.get(g, 0)) for g, c in cg.items())
        den = sum(w(g) * c for g, c in cg.items())
        if num == 0.0:
            num = 1.0  # add-one smoothing on the numerator only
        logs.append(math.log(num / den))
    if not logs:
        raise ValueError("no n-gram orders available")
    score = math.exp(sum(logs) / len(logs))
    # Brevity penalty on raw token counts.
    if len(cand) <= len(ref):
        score *= math.exp(1.0 - len(ref) / len(cand))
    return score


def multiset_intersection(a, b):
    """|a ∩ b| for multisets given as {key: count} dicts."""
    return sum(min(c, b.get(k, 0)) for k, c in a.items())


def composite(rec, weights=(0.25, 0.25, 0.25, 0.25), keywords=None):
    """Composite score from one primitive dump record.

    Record fields: ref_tokens, cand_tokens, ref_subtrees, cand_subtrees
    (multisets as {encoding: count}), ref_edges, cand_edges (lists of
    edge strings).
    """
    ref_t, cand_t = rec["ref_tokens"], rec["cand_tokens"]
    ng = bleu(ref_t, cand_t)
    wng = bleu(ref_t, cand_t, keywords=set(keywords or []))
    cand_sub = rec["cand_subtrees"]
    ref_sub = rec["ref_subtrees"]
    total_cand = sum(cand_sub.values())
    ast = multiset_intersection(cand_sub, ref_sub) / total_cand if total_cand else 0.0
    ref_e = Counter(rec["ref_edges"])
    cand_e = Counter(rec["cand_edges"])
    if sum(ref_e.values()) == 0:
        dataflow = None
    else:
        dataflow = multiset_intersection(cand_e, ref_e) / sum(ref_e.values())
    comps = [ng, wng, ast] + ([dataflow] if dataflow is not None else [])
    ws = list(weights[:3]) + ([weights[3]] if dataflow is not None else [])
    total_w = sum(ws)
    comp = sum(w * c for w, c in zip(ws, comps)) / total_w
    return {"ngram": ng, "weighted_ngram": wng, "ast": ast,
            "dataflow": dataflow, "composite": comp}


def main():
    mode, path = sys.argv[1], sys.argv[2]
    with open(path) as f:
        data = json.load(f)
    if mode == "bleu":
        out = []
        for case in data["cases"]:
            kw = set(case["keywords"]) if "keywords" in case else None
            val = bleu(case["ref"], case["cand"], keywords=kw)
            out.append({"name": case["name"], "value": val})
        print(json.dumps({"cases": out}, indent=1))
    elif mode == "composite":
        kw = data.get("keywords", [])
        out = []
        for rec in data["pairs"]:
            res = composite(rec, keywords=kw)
            res["pair_id"] = rec["pair_id"]
            out.append(res)
        print(json.dumps({"pairs": out}, indent=1))
    else:
        raise SystemExit(f"unknown mode {mode}")


if __name__ == "__main__":
    main()

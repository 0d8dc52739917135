#!/usr/bin/env python3
"""Step-by-step recomputation of round resolution with exact rationals.

Every fixed-point quantity is an integer count of millionths. Each rounding
point documented in docs/market-model.md is reproduced with Fraction and
Python's round(), which rounds half to even. The results are frozen into
tests/fixtures/market_golden.json together with the inputs that produced
them.
"""

import hashlib
import json
import math
import pathlib
from fractions import Fraction

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "market_golden.json"
S = 1_000_000
FEEDBACK = [
    "customers are drifting to competitors",
    "interest is softening",
    "demand feels steady",
    "buyers are warming to us",
    "strong pull from the field",
]
EVENT_KINDS = ["SalesPromotionSupport", "GoodCause", "DistributionIssue", "TechnicalFault"]


def address(label):
    sk = Ed25519PrivateKey.from_private_bytes(hashlib.sha256(label.encode()).digest())
    pk = sk.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)
    return "0x" + hashlib.sha256(pk).digest()[-20:].hex()


def rhe(num, den):
    return round(Fraction(num, den))


def dec(raw):
    """millionths -> shortest decimal string"""
    sign = "-" if raw < 0 else ""
    raw = abs(raw)
    whole, frac = divmod(raw, S)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}." + f"{frac:06d}".rstrip("0")


def parse(text):
    return int(Fraction(text) * S)


def mul(a, b):
    return rhe(a * b, S)


def base_config(teams):
    vocab = {
        "search": ["budget phone", "best smartphone", "phone deals", "5g phone", "long battery"],
        "social": ["campus", "trending", "student discount", "share", "selfie"],
        "display": ["business", "productivity", "premium", "banner", "office"],
        "video": ["unboxing", "camera test", "review", "gaming", "specs"],
    }
    reach = {
        "search": ("0.6", "0.8", "0.7"),
        "social": ("0.9", "0.4", "0.6"),
        "display": ("0.3", "0.6", "0.4"),
        "video": ("0.7", "0.3", "0.9"),
    }
    demand = []
    for r in range(1, 9):
        demand += [
            {"segment": "students", "round": r, "units": str(140 + 5 * r)},
            {"segment": "professionals", "round": r, "units": str(95 + 3 * r)},
            {"segment": "enthusiasts", "round": r, "units": str(55 + 2 * r)},
        ]
    return {
        "teams": teams,
        "treasury": address("golden/treasury"),
        "scheduler": None,
        "products": [
            {"name": "Nova Lite", "segment": "students", "unit_price": "90"},
            {"name": "Nova Plus", "segment": "professionals", "unit_price": "140"},
            {"name": "Nova Pro", "segment": "enthusiasts", "unit_price": "210"},
        ],
        "channels": [
            {
                "name": n,
                "reach": dict(zip(["students", "professionals", "enthusiasts"], reach[n])),
                "keywords": vocab[n],
            }
            for n in ["search", "social", "display", "video"]
        ],
        "weekly_budget": "10000",
        "report_price": "500",
        "adjustment_cap": "0.2",
        "rounds_total": 8,
        "cadence": "weekly",
        "event_probability": "0.3",
        "event_penalty": "0.8",
        "concentration_gain": "0.25",
        "demand": demand,
        "gas": {"price": "20000000000", "block_limit": "6721975"},
        "budget_carryover": False,
    }


# ---- model ---------------------------------------------------------------


def final_spend(team):
    plan = team.get("plan")
    if plan is None:
        return None
    cells = [list(row) for row in plan]
    adj = team.get("adjustment")
    if adj and adj.get("delta"):
        for p, row in enumerate(adj["delta"]):
            for c, d in enumerate(row):
                cells[p][c] = max(0, cells[p][c] + d)
    return cells


def multiplier(cells, kappa):
    flat = [x for row in cells for x in row]
    n = len(flat)
    total = sum(flat)
    if total == 0:
        return S
    if n < 2:
        return S + kappa
    h = Fraction(sum(x * x for x in flat), total * total)
    return S + round(kappa * (h - Fraction(1, n)) / (1 - Fraction(1, n)))


def keyword(chosen, vocab):
    picks = {k.lower() for k in chosen}
    v = {w.lower() for w in vocab}
    matches = len(picks & v)
    denom = max(1, min(len(picks), 3))
    return S // 2 + rhe(S // 2 * min(matches, denom), denom)


def target_weight(team, segments, segment):
    adj = team.get("adjustment") or {}
    w = adj.get("weights") or {}
    total = sum(w.get(s, 0) for s in segments)
    if total == 0:
        return S
    return rhe(w.get(segment, 0) * len(segments) * S, total)


def correct(team, event):
    return event["occurred"] and team.get("response") == EVENT_KINDS.index(event["kind"])


def effective(team, p, cfg, event, cells, m):
    if cells is None or sum(map(sum, cells)) == 0:
        return 0
    seg = cfg["products"][p]["segment"]
    adj = team.get("adjustment") or {}
    kws = adj.get("keywords") or {}
    acc = 0
    for c, ch in enumerate(cfg["channels"]):
        root = math.isqrt(cells[p][c] * S * S)
        reach = parse(ch["reach"].get(seg, "0"))
        acc += mul(mul(root, reach), keyword(kws.get(ch["name"], []), ch["keywords"]))
    segments = sorted({pr["segment"] for pr in cfg["products"]})
    e = mul(acc, m)
    e = mul(e, target_weight(team, segments, seg))
    if event["occurred"] and event["affected_product"] == p and not correct(team, event):
        e = mul(e, parse(cfg["event_penalty"]))
    return e


def shares(addrs, values):
    total = sum(values)
    if total > 0:
        out = [v * S // total for v in values]
        eligible = [i for i, v in enumerate(values) if v > 0]
    else:
        out = [S // len(values)] * len(values)
        eligible = list(range(len(values)))
    winner = min(eligible, key=lambda i: addrs[i])
    out[winner] += S - sum(out)
    return out


def feedback(delta):
    if delta >= 50_000:
        return 4
    if delta >= 10_000:
        return 3
    if delta > -10_000:
        return 2
    if delta > -50_000:
        return 1
    return 0


def resolve(case):
    cfg = case["config"]
    rnd = case["round"]
    event = case["event"]
    demand = {(d["segment"], d["round"]): int(d["units"]) for d in cfg["demand"]}
    kappa = parse(cfg["concentration_gain"])
    teams = sorted(cfg["teams"])
    inputs = {t["team"]: t for t in case["inputs"]}
    np_ = len(cfg["products"])
    rows = []
    for a in teams:
        t = inputs.get(a, {"team": a})
        cells = final_spend(t)
        part = cells is not None
        total = sum(map(sum, cells)) if part else 0
        m = multiplier(cells, kappa) if part and total > 0 else S
        eff = [effective(t, p, cfg, event, cells, m) if part else 0 for p in range(np_)]
        outcome = "none"
        if part and event["occurred"]:
            outcome = "avoided" if correct(t, event) else "penalized"
        rows.append({"team": a, "participated": part, "spend_total": total, "multiplier": m,
                     "effective_spend": eff, "share": [0] * np_, "event_outcome": outcome})
    players = [r for r in rows if r["participated"]]
    for p in range(np_):
        if not players:
            break
        sh = shares([r["team"] for r in players], [r["effective_spend"][p] for r in players])
        for r, s in zip(players, sh):
            r["share"][p] = s
    expected = []
    for r in rows:
        units = []
        revenue = 0
        for p, prod in enumerate(cfg["products"]):
            u = rhe(demand.get((prod["segment"], rnd), 0) * r["share"][p], S)
            units.append(u)
            revenue += u * int(prod["unit_price"])
        overall = rhe(sum(r["share"]), np_)
        prior = inputs.get(r["team"], {}).get("prior_share")
        prior_raw = parse(prior) if prior is not None else rhe(S, len(teams))
        idx = feedback(overall - prior_raw)
        expected.append({
            "team": r["team"],
            "participated": r["participated"],
            "spend_total": str(r["spend_total"]),
            "multiplier": dec(r["multiplier"]),
            "effective_spend": [dec(x) for x in r["effective_spend"]],
            "share": [dec(x) for x in r["share"]],
            "units_sold": units,
            "revenue": str(revenue),
            "event_outcome": r["event_outcome"],
            "score_delta": str(revenue),
            "overall_share": dec(overall),
            "feedback_index": idx,
            "feedback": FEEDBACK[idx],
        })
    segments = []
    for seg in sorted({pr["segment"] for pr in cfg["products"]}):
        best, top = -1, ""
        for ch in cfg["channels"]:
            v = parse(ch["reach"].get(seg, "0"))
            if v > best:
                best, top = v, ch["name"]
        segments.append({"segment": seg, "demand": demand.get((seg, rnd), 0), "top_channel": top})
    return {"teams": expected, "segments": segments}


# ---- cases ---------------------------------------------------------------


def cases():
    names = ["alpha", "bravo", "charlie", "delta"]
    addr = {n: address("golden/team/" + n) for n in names}
    cfg = base_config([addr[n] for n in names])
    out = []

    out.append({
        "name": "four teams, event on Nova Plus",
        "round": 3,
        "config": cfg,
        "event": {"occurred": True, "kind": "GoodCause", "affected_product": 1},
        "inputs": [
            {"team": addr["alpha"],
             "plan": [[6000, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 4000]],
             "adjustment": {"delta": [[1000, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, -800]],
                            "keywords": {"search": ["budget phone", "student offer"],
                                         "video": ["Gaming", "specs", "review"]},
                            "weights": {}},
             "response": 1, "prior_share": "0.25"},
            {"team": addr["bravo"],
             "plan": [[900, 800, 700, 600], [900, 800, 700, 600], [900, 800, 700, 600]],
             "adjustment": {"delta": [],
                            "keywords": {"social": ["Campus", "campus", "SELFIE"],
                                         "display": ["office", "luxury"]},
                            "weights": {"students": 3, "professionals": 1, "enthusiasts": 1}},
             "response": 0, "prior_share": "0.31"},
            {"team": addr["charlie"],
             "plan": [[0, 2500, 0, 0], [2500, 0, 2500, 0], [0, 0, 0, 2500]],
             "adjustment": {"delta": [[0, -500, 0, 0], [-2500, 0, 400, 0], [0, 0, 0, -2600]],
                            "keywords": {"display": ["business", "productivity", "premium", "office"]},
                            "weights": {"professionals": 2}},
             "prior_share": "0.2"},
            {"team": addr["delta"],
             "plan": [[0, 0, 0, 0], [3000, 1500, 2500, 1000], [0, 0, 0, 0]],
             "adjustment": None,
             "response": 1},
        ],
    })

    out.append({
        "name": "test round without an event, one absent and one idle team",
        "round": 1,
        "config": cfg,
        "event": {"occurred": False, "kind": "TechnicalFault", "affected_product": 2},
        "inputs": [
            {"team": addr["alpha"], "plan": [[2500, 2500, 0, 0], [0, 0, 0, 0], [0, 0, 2500, 2500]],
             "adjustment": None},
            {"team": addr["bravo"], "plan": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], "adjustment": None},
            {"team": addr["charlie"], "plan": [[1, 0, 0, 0], [0, 9999, 0, 0], [0, 0, 0, 0]],
             "adjustment": {"delta": [], "keywords": {"social": ["trending"]}, "weights": {}},
             "response": 3},
        ],
    })

    out.append({
        "name": "nobody spends",
        "round": 8,
        "config": cfg,
        "event": {"occurred": True, "kind": "DistributionIssue", "affected_product": 0},
        "inputs": [
            {"team": addr[n], "plan": [[0] * 4 for _ in range(3)], "adjustment": None, "response": 2}
            for n in names
        ],
    })
    return out


def main():
    fixture = {"cases": []}
    for case in cases():
        case["expected"] = resolve(case)
        fixture["cases"].append(case)
    OUT.write_text(json.dumps(fixture, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()

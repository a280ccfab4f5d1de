"""Command line: iwaquad {invariants, layer, scan} ...

Exit codes: 0 ok, 2 prime not split, 3 m not squarefree, 4 inconclusive layer
sieve, 5 scan worker failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import scans
from .anticyclotomic import (
    NotApplicable,
    SieveConfig,
    Verdict,
    first_layer,
    format_layer_poly,
    format_poly,
)
from .invariants import (
    InvalidLayers,
    NotSplit,
    filtration_prediction,
    fundamental_p_unit,
    invariant_report,
    symbol_order,
)
from .quad_arith import NotSquarefree, make_field

EXIT_NOT_SPLIT = 2
EXIT_NOT_SQUAREFREE = 3
EXIT_INCONCLUSIVE = 4
EXIT_WORKER = 5


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit_rows(rows, fmt: str, pretty, out) -> None:
    if fmt == "json":
        scans.write_jsonl(rows, out)
    elif fmt == "tsv":
        scans.write_tsv(rows, out)
    else:
        for r in rows:
            out.write(pretty(r) + "\n")


def _trailer(fmt: str, summary: dict, out) -> None:
    if fmt == "json":
        out.write(json.dumps({"summary": summary}) + "\n")
    else:
        out.write("# " + " ".join(f"{k}={v}" for k, v in summary.items()) + "\n")


def _pretty_row(r: scans.ScanRow) -> str:
    return (f"m={r.m:<9} hk={r.h_k:<6} h={r.h:<6} d(x)={r.delta} d(X)={r.delta_tilde}"
            f" #Hlog={r.hlog}")


# ---------------------------------------------------------------- invariants


def cmd_invariants(args, out=None) -> int:
    out = out or sys.stdout
    try:
        F = make_field(args.m)
        rec = fundamental_p_unit(F, args.p)
    except NotSquarefree as e:
        _err(str(e))
        return EXIT_NOT_SQUAREFREE
    except NotSplit as e:
        _err(str(e))
        return EXIT_NOT_SPLIT
    rep = invariant_report(args.m, args.p, rec)
    data = asdict(rep)
    for k in ("gold", "gold_plus", "gold_sands"):
        data[k] = getattr(rep, k).value
    data["p_part"] = list(rep.p_part) if rep.p_part is not None else None
    data["notes"] = list(rep.notes)
    if args.n is not None:
        e = args.e or 0
        eb = args.ebar or 0
        try:
            fp = filtration_prediction(rec, args.n, e, eb, rep.delta)
        except InvalidLayers as ex:
            _err(str(ex))
            return 1
        data["filtration"] = asdict(fp)
        data["symbol_order"] = symbol_order(args.n, e, rep.delta, args.p)
    if args.oracle:
        data["oracle"] = _oracle_invariants(args, rep)
    if args.format == "json":
        out.write(json.dumps(data) + "\n")
    elif args.format == "tsv":
        keys = [k for k in data if not isinstance(data[k], dict)]
        out.write("\t".join(keys) + "\n")
        out.write("\t".join(str(data[k]) for k in keys) + "\n")
    else:
        out.write(f"m={rep.m} p={rep.p} hk={rep.h_k} h={rep.h} Hp={data['p_part']}\n")
        out.write(f"  x = {rep.x}\n")
        out.write(f"  d(x)={rep.delta} d(X)={rep.delta_tilde} #Hlog={rep.log_class_order}\n")
        out.write(f"  gold: {rep.gold.value}; gold_plus: {rep.gold_plus.value};"
                  f" gold_sands: {rep.gold_sands.value}\n")
        for note in rep.notes:
            out.write(f"  note: {note}\n")
        if "filtration" in data:
            f = data["filtration"]
            out.write(f"  n={f['n']} e={f['e']} ebar={f['ebar']}: #H1={f['order_H1']}"
                      f" #(H2/H1)={f['ratio_H2_H1']} n0={f['n0']} valid={f['valid']}\n")
            out.write(f"  symbol order={data['symbol_order']}\n")
        if "oracle" in data:
            out.write(f"  oracle: {data['oracle']}\n")
    return 0


def _oracle_invariants(args, rep) -> dict:
    from .cas_oracle import Oracle, OracleError

    try:
        o = Oracle(artifacts_dir=args.artifacts_dir)
        r = o.check_invariants(rep.m, rep.p)
    except OracleError as e:
        return {"available": False, "error": str(e)}
    return {"available": True, "clog": r.clog, "tp": r.tp, "hp": r.hp,
            "agrees": r.clog_order == rep.log_class_order}


# ---------------------------------------------------------------- layer


def cmd_layer(args, out=None) -> int:
    out = out or sys.stdout
    try:
        make_field(args.m)
    except NotSquarefree as e:
        _err(str(e))
        return EXIT_NOT_SQUAREFREE
    cfg = SieveConfig(q_bound=args.q_bound, pp=args.pp)
    try:
        res = first_layer(args.m, cfg)
    except NotApplicable as e:
        _err(f"not applicable: {e}")
        return 1
    mf = res.mirror
    if args.format == "json":
        data = {
            "m": res.m, "kstar": mf.star.d, "hstar": mf.h_star, "pp": res.pp,
            "candidates": [{"j": c.j, "w": str(c.w), "Q": format_poly(c.Q),
                            "status": c.status.value, "q": c.eliminated_at}
                           for c in res.candidates],
            "verdict": res.verdict.value,
            "Q_ac": format_poly(res.Q_ac) if res.Q_ac else None,
            "Q": format_layer_poly(res.Q) if res.Q else None,
            "Q_conj": format_layer_poly(res.Q_conj) if res.Q_conj else None,
            "audit": res.audit,
        }
        out.write(json.dumps(data) + "\n")
    else:
        out.write(f"m={res.m} k*=Q(sqrt({mf.star.d})) hstar={mf.h_star} pp={res.pp}\n")
        for c in res.candidates:
            out.write(f"  j={c.j} w={c.w} Q={format_poly(c.Q)}")
            if c.eliminated_at:
                out.write(f" eliminated q={c.eliminated_at}")
            out.write("\n")
        if res.verdict == Verdict.UNIQUE:
            out.write(f"Solution: j={res.selected.j} w={res.selected.w}"
                      f" Q^acyc={format_poly(res.Q_ac)}\n")
            out.write(f"  over k: {format_layer_poly(res.Q)}\n")
            out.write(f"          {format_layer_poly(res.Q_conj)}\n")
        else:
            out.write(f"Inconclusive up to q={cfg.q_bound}: survivors "
                      f"{[c.j for c in res.survivors]}\n")
    return 0 if res.verdict == Verdict.UNIQUE else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------- scan


def _parse_list(s: str) -> list[int]:
    return [int(x) for x in s.replace(" ", "").split(",") if x]


def cmd_scan(args, out=None) -> int:
    out = out or sys.stdout
    stats = scans.ScanStats()
    try:
        if args.kind == "table":
            ms = _parse_list(args.list) if args.list else list(range(args.m_min, args.m_max + 1))
            rows = scans.table_check(ms, args.p, stats)
            _emit_rows(rows, args.format, _pretty_row, out)
            summary = {"rows": len(rows), "not_squarefree": stats.not_squarefree,
                       "not_split": stats.not_split, "errors": len(stats.errors)}
        elif args.kind == "maxima":
            rec = scans.scan_maxima(args.p, args.m_max, quantity=args.quantity,
                                    m_min=args.m_min, workers=args.workers, stats=stats)
            _emit_rows(rec.entries, args.format,
                       lambda e: f"m={e.m:<9} d(X)={e.value}", out)
            summary = {"p": args.p, "m_max": args.m_max, "quantity": args.quantity,
                       "fields": stats.fields, "not_squarefree": stats.not_squarefree,
                       "not_split": stats.not_split}
        else:
            hits = scans.scan_primes(args.m, args.p_max, method=args.method)
            hits = [h for h in hits if h.delta >= 1 or args.method == "shortcut"]
            _emit_rows(hits, args.format,
                       lambda h: f"m={h.m} hkp={h.hkp} h={h.h} p={h.p}", out)
            summary = {"m": args.m, "p_max": args.p_max, "hits": len(hits)}
    except NotSquarefree as e:
        _err(str(e))
        return EXIT_NOT_SQUAREFREE
    except Exception as e:  # worker or scan failure: flush what we have
        out.flush()
        _err(f"scan failed: {e!r}")
        return EXIT_WORKER
    _trailer(args.format, summary, out)
    for m, msg in stats.errors:
        _err(f"m={m}: {msg}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iwaquad", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "tsv", "pretty"), default="pretty")
        p.add_argument("--artifacts-dir", default="oracle_artifacts")
        p.add_argument("--oracle", action="store_true", help="cross-check with gp if present")

    pi = sub.add_parser("invariants", help="invariants of Q(sqrt(-m)) at p")
    pi.add_argument("-m", type=int, required=True)
    pi.add_argument("-p", type=int, required=True)
    pi.add_argument("-n", type=int)
    pi.add_argument("-e", type=int)
    pi.add_argument("--ebar", type=int)
    common(pi)

    pl = sub.add_parser("layer", help="first anti-cyclotomic layer for p = 3")
    pl.add_argument("-m", type=int, required=True)
    pl.add_argument("--q-bound", type=int, default=10 ** 5)
    pl.add_argument("--pp", type=int, help="override the sieve modulus 3^(e_k+2)")
    common(pl)

    ps = sub.add_parser("scan", help="batch scans")
    ps.add_argument("kind", choices=("table", "maxima", "primes"))
    ps.add_argument("-m", type=int)
    ps.add_argument("-p", type=int)
    ps.add_argument("--list", help="comma separated m values (table)")
    ps.add_argument("--m-min", type=int, default=2)
    ps.add_argument("--m-max", type=int)
    ps.add_argument("--p-max", type=int)
    ps.add_argument("--quantity", choices=scans.QUANTITIES, default="program")
    ps.add_argument("--method", choices=("norm", "shortcut", "both"), default="norm")
    ps.add_argument("--workers", type=int, default=1)
    common(ps)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "invariants":
        return cmd_invariants(args)
    if args.command == "layer":
        return cmd_layer(args)
    if args.kind == "table":
        if args.p is None or (args.list is None and args.m_max is None):
            ap.error("scan table needs -p and --list or --m-max")
    elif args.kind == "maxima":
        if args.p is None or args.m_max is None:
            ap.error("scan maxima needs -p and --m-max")
    elif args.m is None or args.p_max is None:
        ap.error("scan primes needs -m and --p-max")
    return cmd_scan(args)


if __name__ == "__main__":
    sys.exit(main())

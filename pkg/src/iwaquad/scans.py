"""Batch scans: table reproduction, running maxima over m, prime searches over p."""

from __future__ import annotations

import json
import multiprocessing as mp
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

from sympy import primerange

from .invariants import (
    PUnitRecord,
    delta_p,
    fundamental_p_unit,
    gold_criterion,
    gold_plus,
    gold_sands,
)
from .padics import vp
from .quad_arith import imaginary_class_numbers, is_squarefree, kronecker, make_field

# quantity scanned by scan_maxima
QUANTITIES = ("delta", "delta_tilde", "program")


@dataclass(frozen=True)
class ScanRow:
    m: int
    p: int
    h_k: int
    h: int
    delta: int
    delta_tilde: int
    p_part: tuple[int, ...] | None = None
    gold: str | None = None
    gold_plus: str | None = None
    gold_sands: str | None = None

    @property
    def program_value(self) -> int:
        # the maxima program adds v_p(h_k) - v_p(h) to a valuation that already
        # includes it, since it works with the generator of p^h_k
        return self.delta_tilde + vp(self.h_k, self.p) - vp(self.h, self.p)

    @property
    def hlog(self) -> int:
        return self.p ** self.delta_tilde

    def to_json(self) -> dict:
        flags = {k: getattr(self, k) for k in ("gold", "gold_plus", "gold_sands")
                 if getattr(self, k) is not None}
        return {"m": self.m, "p": self.p, "hk": self.h_k, "h": self.h, "delta": self.delta,
                "delta_tilde": self.delta_tilde, "hlog": self.hlog, "flags": flags}

    def value(self, quantity: str) -> int:
        if quantity == "delta":
            return self.delta
        if quantity == "delta_tilde":
            return self.delta_tilde
        if quantity == "program":
            return self.program_value
        raise ValueError(f"unknown quantity {quantity!r}")


@dataclass(frozen=True)
class MaximaEntry:
    m: int
    value: int
    h_k: int
    h: int
    delta: int
    delta_tilde: int


@dataclass
class MaximaRecord:
    """Running-maximum trace: the value strictly increases along entries."""

    p: int
    m_bound: int
    quantity: str
    entries: list[MaximaEntry]

    def pairs(self) -> list[tuple[int, int]]:
        return [(e.m, e.value) for e in self.entries]


@dataclass
class ScanStats:
    fields: int = 0
    not_squarefree: int = 0
    not_split: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    def merge(self, other: "ScanStats") -> None:
        self.fields += other.fields
        self.not_squarefree += other.not_squarefree
        self.not_split += other.not_split
        self.errors.extend(other.errors)


def _row(rec: PUnitRecord, with_verdicts: bool = False) -> ScanRow:
    d = delta_p(rec)
    dt = d + rec.vp_hk - rec.vp_h
    if not with_verdicts:
        return ScanRow(rec.m, rec.p, rec.h_k, rec.h, d, dt, rec.p_part)
    return ScanRow(rec.m, rec.p, rec.h_k, rec.h, d, dt, rec.p_part,
                   gold_criterion(rec, d).value, gold_plus(rec, d).value,
                   gold_sands(rec, d).value)


def table_check(m_list: Iterable[int], p: int, stats: ScanStats | None = None) -> list[ScanRow]:
    """Full invariants for each m; non-squarefree or non-split m are skipped and
    counted, per-row errors are recorded and the scan continues."""
    stats = stats if stats is not None else ScanStats()
    out = []
    for m in m_list:
        if not is_squarefree(m):
            stats.not_squarefree += 1
            continue
        F = make_field(m)
        if kronecker(F.D, p) != 1:
            stats.not_split += 1
            continue
        try:
            out.append(_row(fundamental_p_unit(F, p), with_verdicts=True))
            stats.fields += 1
        except Exception as e:  # recorded, not fatal
            stats.errors.append((m, repr(e)))
    return sorted(out, key=lambda r: (r.m, r.p))


# class numbers shared with forked workers
_HK: dict[int, object] = {}


def _class_numbers(limit: int):
    for lim, arr in _HK.items():
        if lim >= limit:
            return arr
    arr = imaginary_class_numbers(limit)
    _HK.clear()
    _HK[limit] = arr
    return arr


def iter_split_fields(p: int, m_min: int, m_max: int, hk_table=None,
                      stats: ScanStats | None = None) -> Iterator[ScanRow]:
    """Rows for every squarefree m in [m_min, m_max] with p split in Q(sqrt(-m))."""
    H = hk_table if hk_table is not None else _class_numbers(4 * m_max)
    for m in range(max(m_min, 1), m_max + 1):
        if not is_squarefree(m):
            if stats is not None:
                stats.not_squarefree += 1
            continue
        F = make_field(m)
        if kronecker(F.D, p) != 1:
            if stats is not None:
                stats.not_split += 1
            continue
        # the reduced-form count is the class number for every fundamental D < -4
        hk = int(H[-F.D]) if m > 3 else 1
        if stats is not None:
            stats.fields += 1
        yield _row(fundamental_p_unit(F, p, class_number=hk))


def _local_maxima(rows: Iterable[ScanRow], quantity: str, floor: int = 0) -> list[MaximaEntry]:
    best = floor
    out = []
    for r in rows:
        v = r.value(quantity)
        if v > best:
            best = v
            out.append(MaximaEntry(r.m, v, r.h_k, r.h, r.delta, r.delta_tilde))
    return out


def _chunk_job(args):
    p, lo, hi, quantity, limit = args
    st = ScanStats()
    return _local_maxima(iter_split_fields(p, lo, hi, _class_numbers(limit), st), quantity), st


def scan_maxima(p: int, m_bound: int, quantity: str = "program", m_min: int = 2,
                workers: int = 1, chunk: int = 20000,
                stats: ScanStats | None = None) -> MaximaRecord:
    """Successive strict maxima over squarefree m in [m_min, m_bound] with p split.

    quantity "program" is delta_tilde + v_p(h_k) - v_p(h), the value printed by
    the published maxima program; "delta_tilde" and "delta" are the invariants.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    stats = stats if stats is not None else ScanStats()
    if m_bound < m_min:
        return MaximaRecord(p, m_bound, quantity, [])
    limit = 4 * m_bound
    _class_numbers(limit)
    jobs = [(p, lo, min(lo + chunk - 1, m_bound), quantity, limit)
            for lo in range(m_min, m_bound + 1, chunk)]
    if workers <= 1:
        parts = [_chunk_job(j) for j in jobs]
    else:
        ctx = mp.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_chunk_job, jobs)
    # the global maxima are among the per-chunk running maxima
    best = 0
    out = []
    for entries, st in parts:
        stats.merge(st)
        for e in entries:
            if e.value > best:
                best = e.value
                out.append(e)
    return MaximaRecord(p, m_bound, quantity, out)


def scan_nonzero(p: int, m_max: int, quantity: str = "delta_tilde",
                 m_min: int = 2) -> list[ScanRow]:
    return [r for r in iter_split_fields(p, m_min, m_max) if r.value(quantity) != 0]


@dataclass(frozen=True)
class PrimeHit:
    m: int
    p: int
    h: int
    hkp: int
    delta: int
    shortcut: bool | None = None


def shortcut_hit(rec: PUnitRecord) -> bool:
    """delta >= 1 from the trace of x alone, working modulo p^2."""
    p = rec.p
    mod = p * p
    a = int(rec.x.trace()) % mod
    q = (pow(a, p - 1, mod) - 1) // p % p
    z = q if rec.h != 1 else (a * a * q + 1) % p
    return z % p == 0


def scan_primes(m: int, p_max: int, p_min: int = 3, method: str = "norm") -> list[PrimeHit]:
    """Split primes p in [p_min, p_max] with delta_p(Q(sqrt(-m))) >= 1.

    method "norm" decides with the exact norm valuation, "shortcut" with the
    trace test, "both" computes both and keeps the norm verdict.
    """
    if method not in ("norm", "shortcut", "both"):
        raise ValueError(f"unknown method {method!r}")
    F = make_field(m)
    from .quad_arith import class_group

    cg = class_group(F)
    out = []
    for p in primerange(max(p_min, 3), p_max + 1):
        if kronecker(F.D, p) != 1:
            continue
        rec = fundamental_p_unit(F, p, class_number=cg.order)
        sc = shortcut_hit(rec) if method != "norm" else None
        if method == "shortcut":
            if sc:
                out.append(PrimeHit(m, p, rec.h, p ** rec.vp_hk, -1, sc))
            continue
        d = delta_p(rec)
        if d >= 1 or sc:
            # in "both" mode a shortcut-only hit is kept, flagged by delta == 0
            out.append(PrimeHit(m, p, rec.h, p ** rec.vp_hk, d, sc))
    return out


def method_disagreements(hits: list[PrimeHit]) -> list[PrimeHit]:
    """Hits of a "both" scan where the trace test and the norm valuation differ."""
    return [h for h in hits if h.shortcut is not None and h.shortcut != (h.delta >= 1)]


def _as_dict(r) -> dict:
    return r.to_json() if hasattr(r, "to_json") else asdict(r)


def write_jsonl(rows, fh) -> None:
    for r in rows:
        fh.write(json.dumps(_as_dict(r), sort_keys=False) + "\n")


def write_tsv(rows, fh) -> None:
    rows = list(rows)
    if not rows:
        return
    keys = list(_as_dict(rows[0]).keys())
    fh.write("\t".join(keys) + "\n")
    for r in rows:
        d = _as_dict(r)
        fh.write("\t".join("" if d[k] is None else str(d[k]) for k in keys) + "\n")

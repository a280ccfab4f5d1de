"""Optional GP interpreter oracle.

Each query writes a script from a template, runs one `gp -q` subprocess on it and
parses line-anchored output.  Scripts and transcripts are kept in an artifacts
directory.  Set IWAQUAD_GP to point at a specific interpreter.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path

GP_ENV = "IWAQUAD_GP"
DEFAULT_TIMEOUT = 300
DEFAULT_PARALLEL = 2


class OracleError(Exception):
    pass


class Unavailable(OracleError):
    pass


class ScriptFailure(OracleError):
    pass


class ParseFailure(OracleError, ValueError):
    pass


@dataclass(frozen=True)
class OracleInfo:
    available: bool
    path: str | None
    version: str | None = None
    diagnostic: str | None = None


def gp_path() -> str | None:
    env = os.environ.get(GP_ENV)
    if env:
        return env
    return shutil.which("gp")


def probe(path: str | None = None, timeout: float = 30) -> OracleInfo:
    """Detect a working interpreter and record its version."""
    path = path or gp_path()
    if not path:
        return OracleInfo(False, None, diagnostic="gp not found")
    try:
        res = subprocess.run([path, "-q", "-f"], input="print(version());\\q\n",
                             capture_output=True, text=True, timeout=timeout)
    except (OSError, subprocess.SubprocessError) as e:
        return OracleInfo(False, path, diagnostic=f"cannot run {path}: {e}")
    m = re.search(r"\[\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)", res.stdout)
    if res.returncode != 0 or not m:
        diag = (res.stderr or res.stdout).strip()[:200]
        return OracleInfo(False, path, diagnostic=f"unexpected probe output: {diag!r}")
    return OracleInfo(True, path, ".".join(m.groups()))


# ---------------------------------------------------------------- templates

INVARIANTS_TEMPLATE = """\\p 200
{{p={p};m={m};n={n};P=x^2+m;k=bnfinit(P,1);Clog=bnflog(k,p);Hk=k.cyc;hk=k.no;
D=divisors(hk);N=numdiv(hk);F=idealprimedec(k,p)[1];for(j=1,N,hh=D[j];
Y=idealpow(k,F,hh);Q=bnfisprincipal(k,Y);if(Q[1]!=0,next);h=hh;break);
vhk=valuation(hk,p);vh=valuation(h,p);
X=Mod(Q[2][1]*k.zk[1]+Q[2][2]*k.zk[2],P);qx=X^(p-1)-1;z=norm(qx);
delta=valuation(z,p)-1;Delta=delta+vhk-vh;Kn=bnrinit(k,p^n);CKn=Kn.cyc;
Tp=List();dt=matsize(CKn)[2];for(j=1,dt-2,c=CKn[dt-j+1];w=valuation(c,p);
if(w>0,listinsert(Tp,p^w,1)));Hp=List();dh=matsize(Hk)[2];for(j=1,dh,c=Hk[dh+1-j];
w=valuation(c,p);if(w>0,listinsert(Hp,p^w,1)));
print("ORACLE hk=",hk," h=",h);
print("ORACLE Clog=",Clog);
print("ORACLE Hp=",Vec(Hp));
print("ORACLE Tp=",Vec(Tp));
print("ORACLE d(x)=",delta," d(X)=",Delta)}}
\\q
"""

CAPITULATION_TEMPLATE = """\\p 200
{{m={m};Q={Q};Pk=x^2+m;k=bnfinit(Pk,1);h=k.no;
h=h/3^valuation(h,3);PK1=polcompositum(Q,Pk)[1];K1=bnfinit(PK1,1);
print("ORACLE Hk=",k.cyc);
print("ORACLE HK1=",K1.cyc);
G=nfgaloisconj(K1);for(j=1,6,S=G[j];S=nfgaloisapply(K1,S,S);if(S==x,next);break);
rK1=matsize(K1.clgp[2])[2];for(j=1,rK1,A0=K1.clgp[3][j];A1=idealpow(K1,A0,h);
As=nfgaloisapply(K1,S,A1);Ass=nfgaloisapply(K1,S,As);NuA=idealmul(K1,A1,As);
NuA=idealmul(K1,NuA,Ass);B=bnfisprincipal(K1,NuA,0);print("ORACLE NU ",j," E=",B))}}
\\q
"""


# ---------------------------------------------------------------- parsing


def _int_list(s: str) -> list[int]:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseFailure(f"not a list: {s!r}")
    body = s[1:-1].replace("~", "").strip()
    if body.startswith("List("):
        body = body[5:-1]
    body = body.strip("[]")
    if not body.strip():
        return []
    try:
        return [int(x) for x in body.split(",")]
    except ValueError as e:
        raise ParseFailure(f"bad integer list {s!r}") from e


def _split_top(s: str) -> list[str]:
    """Split a bracketed list at depth-1 commas."""
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseFailure(f"not a list: {s!r}")
    out, depth, cur = [], 0, ""
    for ch in s[1:-1]:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def parse_clog(s: str) -> tuple[list[int], list[int], list[int]]:
    parts = _split_top(s.replace(" ", ""))
    if len(parts) != 3:
        raise ParseFailure(f"Clog must have three components: {s!r}")
    return tuple(_int_list(p) for p in parts)  # type: ignore[return-value]


@dataclass
class OracleReport:
    available: bool
    query: dict
    hk: int | None = None
    h: int | None = None
    clog: tuple[list[int], list[int], list[int]] | None = None
    hp: list[int] | None = None
    tp: list[int] | None = None
    dx: int | None = None
    dX: int | None = None
    hk_cyc: list[int] | None = None
    hK1_cyc: list[int] | None = None
    nu_vectors: list[list[int] | None] = field(default_factory=list)
    capitulation: str | None = None
    transcript: str = ""

    @property
    def clog_order(self) -> int | None:
        if self.clog is None:
            return None
        n = 1
        for c in self.clog[0]:
            n *= c
        return n


_LINE = re.compile(r"^ORACLE (\S+?)=(.*)$")


def parse_invariants(text: str, query: dict | None = None) -> OracleReport:
    rep = OracleReport(True, query or {}, transcript=text)
    seen = set()
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("ORACLE "):
            continue
        if line.startswith("ORACLE hk="):
            m = re.match(r"ORACLE hk=(\d+) h=(\d+)$", line)
            if not m:
                raise ParseFailure(f"bad line {line!r}")
            rep.hk, rep.h = int(m.group(1)), int(m.group(2))
            seen.add("hk")
        elif line.startswith("ORACLE d(x)="):
            m = re.match(r"ORACLE d\(x\)=(-?\d+) d\(X\)=(-?\d+)$", line)
            if not m:
                raise ParseFailure(f"bad line {line!r}")
            rep.dx, rep.dX = int(m.group(1)), int(m.group(2))
            seen.add("d")
        else:
            m = _LINE.match(line)
            if not m:
                raise ParseFailure(f"bad line {line!r}")
            key, val = m.groups()
            if key == "Clog":
                rep.clog = parse_clog(val)
            elif key == "Hp":
                rep.hp = _int_list(val)
            elif key == "Tp":
                rep.tp = _int_list(val)
            else:
                continue
            seen.add(key)
    missing = {"hk", "d", "Clog", "Hp", "Tp"} - seen
    if missing:
        raise ParseFailure(f"missing fields {sorted(missing)} in oracle output")
    return rep


def _leading_vector(s: str) -> list[int] | None:
    """Exponent vector at the start of a bnfisprincipal result; None if opaque."""
    m = re.match(r"^\[*\s*(\[[-\d,\s]*\])~?", s.strip())
    if not m:
        return None
    try:
        return _int_list(m.group(1))
    except ParseFailure:
        return None


def subgroup_order(vectors: list[list[int]], cyc: list[int]) -> int:
    """Order of the subgroup of prod Z/cyc_i generated by the vectors."""
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form

    r = len(cyc)
    if r == 0:
        return 1
    rows = [list(v) + [0] * (r - len(v)) for v in vectors]
    rows += [[c if i == j else 0 for j in range(r)] for i, c in enumerate(cyc)]
    M = Matrix(rows)
    S = smith_normal_form(M)
    index = 1
    for i in range(r):
        index *= abs(S[i, i])
    total = 1
    for c in cyc:
        total *= c
    return total // index


def parse_capitulation(text: str, query: dict | None = None, p: int = 3) -> OracleReport:
    rep = OracleReport(True, query or {}, transcript=text)
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("ORACLE Hk="):
            rep.hk_cyc = _int_list(line[len("ORACLE Hk="):])
        elif line.startswith("ORACLE HK1="):
            rep.hK1_cyc = _int_list(line[len("ORACLE HK1="):])
        elif line.startswith("ORACLE NU "):
            m = re.match(r"ORACLE NU (\d+) E=(.*)$", line)
            if not m:
                raise ParseFailure(f"bad line {line!r}")
            rep.nu_vectors.append(_leading_vector(m.group(2)))
    if rep.hk_cyc is None or rep.hK1_cyc is None:
        raise ParseFailure("class groups missing from capitulation output")
    rep.capitulation = capitulation_verdict(rep.nu_vectors, rep.hK1_cyc, rep.hk_cyc, p)
    return rep


def capitulation_verdict(vectors, hK1_cyc, hk_cyc, p: int = 3) -> str:
    """'total' when every norm image is principal, 'none' when the images have
    the size of the p-class group of k, 'partial' otherwise."""
    from .padics import vp

    known = [v for v in vectors if v is not None]
    if len(known) != len(vectors):
        raise ParseFailure("opaque exponent vector in capitulation output")
    order = subgroup_order(known, hK1_cyc)
    img = vp(order, p)
    hkp = sum(vp(c, p) for c in hk_cyc if c % p == 0)
    if img == 0:
        return "total"
    if img >= hkp:
        return "none"
    return "partial"


# ---------------------------------------------------------------- runner


class Oracle:
    _sem_lock = threading.Lock()
    _sems: dict[int, threading.Semaphore] = {}

    def __init__(self, path: str | None = None, timeout: float = DEFAULT_TIMEOUT,
                 artifacts_dir: str | os.PathLike | None = None,
                 max_parallel: int = DEFAULT_PARALLEL, memory: str | None = None):
        info = probe(path)
        if not info.available:
            raise Unavailable(info.diagnostic or "gp unavailable")
        self.info = info
        self.path = info.path
        self.timeout = timeout
        self.memory = memory
        self.artifacts = Path(artifacts_dir or "oracle_artifacts")
        with Oracle._sem_lock:
            self._sem = Oracle._sems.setdefault(max_parallel, threading.Semaphore(max_parallel))

    def run(self, script: str, name: str) -> str:
        self.artifacts.mkdir(parents=True, exist_ok=True)
        spath = self.artifacts / f"{name}.gp"
        spath.write_text(script)
        args = [self.path, "-q", "-f"]
        if self.memory:
            args += ["-s", self.memory]
        with self._sem:
            try:
                res = subprocess.run(args, input=script, capture_output=True, text=True,
                                     timeout=self.timeout)
            except subprocess.TimeoutExpired as e:
                raise ScriptFailure(f"{name}: timeout after {self.timeout}s") from e
            except OSError as e:
                raise ScriptFailure(f"{name}: {e}") from e
        (self.artifacts / f"{name}.out").write_text(res.stdout + "\n--- stderr ---\n" + res.stderr)
        if res.returncode != 0 or "***" in res.stdout or "***" in res.stderr:
            raise ScriptFailure(f"{name}: gp error: {(res.stderr or res.stdout).strip()[:300]}")
        return res.stdout

    def check_invariants(self, m: int, p: int, n: int = 12) -> OracleReport:
        script = INVARIANTS_TEMPLATE.format(m=m, p=p, n=n)
        out = self.run(script, f"invariants_m{m}_p{p}")
        return parse_invariants(out, {"m": m, "p": p})

    def check_capitulation(self, m: int, Q) -> OracleReport:
        from .anticyclotomic import format_poly

        qs = Q if isinstance(Q, str) else format_poly(Q)
        script = CAPITULATION_TEMPLATE.format(m=m, Q=qs)
        out = self.run(script, f"capitulation_m{m}")
        return parse_capitulation(out, {"m": m, "Q": qs})


def compare_log_order(report: OracleReport, native_delta_tilde: int, p: int) -> bool:
    """#Clog[1] from the oracle against the native p^delta_tilde."""
    return report.clog_order == p ** native_delta_tilde

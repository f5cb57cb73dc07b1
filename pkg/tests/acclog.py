"""Shared record of acceptance clauses, printed at the end of the run."""

import time

CRITERIA = {
    1: "csz identity",
    2: "Hochschild algebra",
    3: "DOI laws",
    4: "ideal inequalities",
    5: "Dixmier normalization",
    6: "heat theorem, circle N=4096",
    7: "zeta residue, circle",
    8: "character formula surrogate",
    9: "hypothesis probe slopes",
    10: "Subkhankulov kernel",
    11: "torus even model sanity",
}

CLAUSES = {}


def record(criterion, clause, ok, detail):
    CLAUSES.setdefault(criterion, []).append((clause, bool(ok), detail))
    return bool(ok)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def lines():
    out = []
    for k, title in CRITERIA.items():
        clauses = CLAUSES.get(k)
        if not clauses:
            out.append(f"ACCEPTANCE {k:>2} NOT RUN  {title}")
            continue
        ok = all(c[1] for c in clauses)
        body = "; ".join(f"{name} {'ok' if good else 'FAILED'} ({d})" for name, good, d in clauses)
        out.append(f"ACCEPTANCE {k:>2} {'PASS' if ok else 'FAIL'}  {title}: {body}")
    return out

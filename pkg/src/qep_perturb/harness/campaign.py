"""Trial campaigns: sample, bound, compare with the oracle, aggregate."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..canonical import EigStructure, Kind, block_index_of, structure_from_pair
from ..errors import QepPerturbError
from ..linalg import eig_pair, match_spectra
from ..pair_bounds import (
    PairPerturbation,
    eig_bound_jordan,
    eig_bound_semisimple,
    jordan_gaps,
    jordan_lhs,
    sin_theta_bound_B_nonsingular,
)
from ..qep import (
    hyperbolic_bound,
    linearize,
    qep_eig_bound_jordan,
    qep_eig_bound_semisimple,
    qep_sin_bound,
)
from ..sylvester import thread_count
from .oracle import nearest_distinct, oracle_exact
from .problems import ProblemSpec
from .sampling import sample_perturbation

DOMINANCE_RTOL = 1e-9


def format_eig(lam: complex) -> str:
    """``-3.4142`` for real values, ``0.0438±3.4550i`` for conjugate pairs."""
    lam = complex(lam)
    if abs(lam.imag) <= 1e-8 * max(1.0, abs(lam)):
        return f"{lam.real:.4f}"
    return f"{lam.real:.4f}±{abs(lam.imag):.4f}i"


@dataclass(frozen=True)
class TrialCampaign:
    """``group1`` indexes the eigenvalues of the original pair (descending modulus).

    With ``linearization = "L2"`` the generic pair bounds are applied to the
    L2 pencils; the quadratic-problem bounds are stated for L1 only.
    """

    problem: ProblemSpec
    eta: float = 1e-8
    seed: int = 0
    trials: int = 100
    group1: tuple | None = None
    threads: int | None = None
    linearization: str = "L1"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.linearization not in ("L1", "L2"):
            raise ValueError(f"unknown linearization {self.linearization!r}")


@dataclass
class ReportRow:
    trial: int
    bound: str
    label: str
    value: float
    exact: float
    status: str
    factors: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.status in ("ok", "fallback") and bool(np.isfinite(self.value))

    @property
    def ratio(self) -> float:
        if not self.valid or not np.isfinite(self.exact):
            return float("nan")
        if self.exact == 0:
            return float("inf") if self.value > 0 else 1.0
        return self.value / self.exact

    @property
    def violated(self) -> bool:
        return self.valid and np.isfinite(self.exact) and self.exact > self.value * (1 + DOMINANCE_RTOL)


@dataclass
class BoundReport:
    problem: str
    eta: float
    seed: int
    trials: int
    rows: list = field(default_factory=list)
    reference: dict = field(default_factory=dict)

    def violations(self) -> list:
        return [r for r in self.rows if r.violated]

    @property
    def passed(self) -> bool:
        return not self.violations()

    def keys(self) -> list:
        seen = []
        for r in self.rows:
            if (r.bound, r.label) not in seen:
                seen.append((r.bound, r.label))
        return seen

    def summary(self) -> list[dict]:
        out = []
        for bound, label in self.keys():
            rows = [r for r in self.rows if r.bound == bound and r.label == label]
            ok = [r for r in rows if r.valid]
            vals = np.array(sorted(r.value for r in ok))
            ex = np.array(sorted(r.exact for r in ok))
            ref = self.reference.get(f"{bound}|{label}")
            med = float(np.median(vals)) if len(vals) else float("nan")
            out.append({
                "bound": bound,
                "label": label,
                "rows": len(rows),
                "valid": len(ok),
                "value_min": float(vals.min()) if len(vals) else float("nan"),
                "value_median": med,
                "value_max": float(vals.max()) if len(vals) else float("nan"),
                "exact_median": float(np.median(ex)) if len(ex) else float("nan"),
                "reference": ref,
                "ratio_to_reference": (med / ref) if ref else None,
                "violations": sum(r.violated for r in rows),
            })
        return out

    def median(self, bound: str, label: str) -> float:
        for s in self.summary():
            if s["bound"] == bound and s["label"] == label:
                return s["value_median"]
        raise KeyError((bound, label))


@dataclass
class _Context:
    spec: ProblemSpec
    triple: object
    orig: EigStructure
    eigs: np.ndarray
    hyper_index: int
    group_targets: list


def prepare(tc: TrialCampaign) -> _Context:
    spec = tc.problem
    t = spec.triple()
    P = linearize(t, tc.linearization)
    eigs = eig_pair(P).values
    declared = spec.declared_structure()
    if declared is not None and tc.linearization != "L1":
        raise ValueError("declared canonical structures refer to the L1 pair")
    orig = declared or structure_from_pair(P)
    if tc.group1:
        g1 = {block_index_of(orig, eigs[i]) for i in tc.group1}
    else:
        g1 = {block_index_of(orig, spec.default_target(eigs))}
    orig = orig.with_group1(g1)
    targets = [complex(v) for v in orig.group_eigenvalues(1)]
    first = next(b for i, b in enumerate(orig.blocks) if i in g1)
    hyper = int(np.argmin(np.abs(eigs - first.eig)))
    return _Context(spec, t, orig, eigs, hyper, targets)


def _match_blocks(orig: EigStructure, pert: EigStructure) -> list[list[int]]:
    """Perturbed blocks matched to each original block, via column eigenvalues."""
    oc, pc = orig.column_eigenvalues(), pert.column_eigenvalues()
    perm = match_spectra(oc, pc)
    owner = [i for i, b in enumerate(pert.blocks) for _ in range(b.dim)]
    out = []
    for i in range(len(orig.blocks)):
        bs = []
        for c in orig.block_columns(i):
            j = owner[perm[c]]
            if j not in bs:
                bs.append(j)
        out.append(bs)
    return out


def _fail_row(trial, bound, label, exc) -> "ReportRow":
    return ReportRow(trial, bound, label, float("nan"), float("nan"), "structure-failed", {"error": str(exc)})


def _bound_functions(qp, lin: str):
    if lin == "L1":
        return (lambda o, p: qep_sin_bound(qp, o, p),
                lambda o, p, i, j: qep_eig_bound_semisimple(qp, o, p, i, j),
                lambda o, p, i, j: qep_eig_bound_jordan(qp, o, p, i, j))
    pp = PairPerturbation(linearize(qp.base, lin), linearize(qp.perturbed, lin))
    return (lambda o, p: sin_theta_bound_B_nonsingular(pp, o, p),
            lambda o, p, i, j: eig_bound_semisimple(pp, o, p, i, j),
            lambda o, p, i, j: eig_bound_jordan(pp, o, p, i, j))


def run_trial(ctx: _Context, tc: TrialCampaign, trial: int) -> list[ReportRow]:
    qp = sample_perturbation(ctx.triple, tc.eta, tc.seed, trial)
    orig = ctx.orig
    oracle = oracle_exact(qp, ctx.group_targets, tc.linearization)
    try:
        pert = structure_from_pair(linearize(qp.perturbed, tc.linearization))
    except QepPerturbError as exc:
        return [_fail_row(trial, "structure", "all", exc)]
    matched = _match_blocks(orig, pert)
    pert = pert.with_group1({j for i in orig.group1 for j in matched[i]})
    sub_bound, ss_bound, jordan_bound = _bound_functions(qp, tc.linearization)
    rows = []

    g1 = sorted(orig.group1)
    e = sub_bound(orig, pert)
    if len(g1) == 1 and orig.blocks[g1[0]].size == 1:
        b = orig.blocks[g1[0]]
        exact = float(oracle.sin_vec[oracle.index_of(b.eig)])
    else:
        exact = float(oracle.subspace_sin)
    e.factors["subspace_sin_exact"] = oracle.subspace_sin
    e.factors["group_label"] = ",".join(format_eig(orig.blocks[i].eig) for i in g1)
    rows.append(ReportRow(trial, e.name, "group1", e.value, exact, e.status, e.factors))

    for i, b in enumerate(orig.blocks):
        if b.kind not in (Kind.R3, Kind.R4):
            continue
        label = format_eig(b.eig)
        if b.size == 1:
            if len(matched[i]) != 1:
                continue
            e = ss_bound(orig, pert, i, matched[i][0])
            exact = float(oracle.rel_err[oracle.index_of(b.eig)])
            rows.append(ReportRow(trial, e.name, label, e.value, exact, e.status, e.factors))
            continue
        used = nearest_distinct(oracle.lam_pert, [pert.blocks[j].eig for j in matched[i]])
        for j, k in zip(matched[i], used):
            e = jordan_bound(orig, pert, i, j)
            lam_t = oracle.lam_pert[k]
            if lam_t.imag < 0:
                lam_t = lam_t.conjugate()
            g, gt = jordan_gaps(b.eig, lam_t)
            pb = pert.blocks[j]
            exact = jordan_lhs(g, gt, b.size, pb.size)
            e.factors["gamma_exact"] = g
            rows.append(ReportRow(trial, e.name, label, e.value, float(exact), e.status, e.factors))

    e = hyperbolic_bound(qp, ctx.hyper_index)
    rows.append(ReportRow(trial, e.name, "group1", e.value,
                          float(e.factors.get("exact_reciprocal_angle", float("nan"))), e.status, e.factors))
    return rows


def run_campaign(tc: TrialCampaign) -> BoundReport:
    """Run all trials; rows are ordered by trial index whatever the thread count."""
    ctx = prepare(tc)
    threads = tc.threads or thread_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            per_trial = list(ex.map(lambda k: run_trial(ctx, tc, k), range(tc.trials)))
    else:
        per_trial = [run_trial(ctx, tc, k) for k in range(tc.trials)]
    rows = [r for rs in per_trial for r in rs]
    ref = {}
    for r in rows:
        v = tc.problem.reference(r.bound, r.label)
        if v is not None:
            ref[f"{r.bound}|{r.label}"] = v
    return BoundReport(tc.problem.label(), tc.eta, tc.seed, tc.trials, rows, ref)

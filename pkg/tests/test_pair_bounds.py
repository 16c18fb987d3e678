import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from qep_perturb.canonical import BlockSpec, EigStructure, Kind, block_index_of, build_block, pair_from_structure, structure_from_pair
from qep_perturb.errors import NotApplicableError
from qep_perturb.linalg import MatrixPair, match_spectra, sin_theta_norm
from qep_perturb.pair_bounds import (
    JORDAN_GAP_LIMIT,
    GapParameters,
    PairPerturbation,
    certify_gap,
    eig_bound_jordan,
    eig_bound_semisimple,
    jordan_lhs,
    sin_theta_bound_B_nonsingular,
    sin_theta_bound_regular,
    sin_theta_bound_ui,
)


def rand_herm(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


def rand_pair(rng, n, real_only=False):
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 2 * np.eye(n)
    blocks = []
    while sum(b.dim for b in blocks) < n:
        if not real_only and n - sum(b.dim for b in blocks) >= 2 and rng.random() < 0.4:
            blocks.append(BlockSpec(Kind.R4, 1, 1, complex(rng.uniform(-3, 3), rng.uniform(0.5, 3))))
        else:
            blocks.append(BlockSpec(Kind.R3, 1, int(rng.choice([-1, 1])),
                                    rng.uniform(0.5, 5) * rng.choice([-1.0, 1.0])))
    return pair_from_structure(blocks, V)


def perturb(pair, rng, eps):
    dA = eps * rand_herm(rng, pair.n) * np.abs(pair.A).max()
    dB = eps * rand_herm(rng, pair.n) * np.abs(pair.B).max()
    return MatrixPair(pair.A + dA, pair.B + dB)


def grouped(pair, pert, target):
    orig = structure_from_pair(pair)
    i = block_index_of(orig, target)
    orig = orig.with_group1({i})
    pst = structure_from_pair(pert)
    perm = match_spectra(orig.column_eigenvalues(), pst.column_eigenvalues())
    owner = [k for k, b in enumerate(pst.blocks) for _ in range(b.dim)]
    j = owner[perm[orig.block_columns(i)[0]]]
    return orig, pst.with_group1({j}), i, j


def exact_subspace_sin(pair, pert, orig, pst):
    # independent route: QZ eigenvectors of both pairs
    def basis(p, vals):
        w, v = sla.eig(p.A, p.B)
        idx = [int(np.argmin(np.abs(w - t))) for t in vals]
        return v[:, idx]
    return sin_theta_norm(basis(pair, orig.group_eigenvalues(1)), basis(pert, pst.group_eigenvalues(1)))


def test_zero_perturbation_gives_zero_bounds():
    pair = MatrixPair(np.diag([1.0, 3.0, -2.0]), np.eye(3))
    s = structure_from_pair(pair).with_group1({2})
    pp = PairPerturbation(pair, pair)
    assert sin_theta_bound_regular(pp, s, s).value == 0
    assert sin_theta_bound_B_nonsingular(pp, s, s).value == 0
    mu, split = sin_theta_bound_ui(pp, s, s)
    assert mu.value == 0 and split.value == 0
    e = eig_bound_semisimple(pp, s, s, 0, 0)
    assert e.value == 0 and e.status == "ok"


def test_diagonal_pair_bound_dominates():
    pair = MatrixPair(np.diag([1.0, 3.0]), np.eye(2))
    pert = MatrixPair(np.diag([1.0, 3.0 + 1e-6]), np.eye(2))
    orig, pst, _, _ = grouped(pair, pert, 1.0)
    e = sin_theta_bound_B_nonsingular(PairPerturbation(pair, pert), orig, pst)
    assert e.valid and e.value >= exact_subspace_sin(pair, pert, orig, pst)
    assert exact_subspace_sin(pair, pert, orig, pst) == pytest.approx(0, abs=1e-15)


def test_gap_parameters_mu():
    pair = MatrixPair(np.diag([1.0, 10.0]), np.eye(2))
    orig = structure_from_pair(pair)
    orig = orig.with_group1({block_index_of(orig, 10.0)})
    gp = certify_gap(orig, orig)
    assert (gp.alpha, gp.delta, gp.config) == pytest.approx((1.0, 9.0, 1))
    assert gp.mu == pytest.approx(9 / math.sqrt(101))
    assert gp.q == 2
    mirrored = orig.with_group1({block_index_of(orig, 1.0)})
    gp2 = certify_gap(mirrored, mirrored)
    assert gp2.config == 2 and gp2.mu == pytest.approx(9 / math.sqrt(101))
    with pytest.raises(ValueError):
        GapParameters(1.0, 0.0)


def test_certify_gap_fails_on_interlaced_groups():
    pair = MatrixPair(np.diag([1.0, 10.0, 5.0]), np.eye(3))
    s = structure_from_pair(pair)
    s = s.with_group1({block_index_of(s, 1.0), block_index_of(s, 10.0)})
    with pytest.raises(NotApplicableError):
        certify_gap(s, s)


@pytest.mark.parametrize("m", range(1, 7))
def test_jordan_block_norm_at_most_twice_eigenvalue(m):
    for lam in (0.5, -3.0):
        L, O = build_block(BlockSpec(Kind.R3, m, 1, lam))
        assert np.linalg.norm(O @ L, 2) <= 2 * abs(lam) * (1 + 1e-12)
    L, O = build_block(BlockSpec(Kind.R4, m, 1, 1 + 2j))
    assert np.linalg.norm(O @ L, 2) <= 2 * abs(1 + 2j) * (1 + 1e-12)


def test_dominance_on_random_pairs():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(100):
        pair = rand_pair(rng, 4)
        pert = perturb(pair, rng, 1e-7)
        orig = structure_from_pair(pair)
        target = orig.blocks[0].eig
        orig, pst, i, j = grouped(pair, pert, target)
        pp = PairPerturbation(pair, pert)
        e = sin_theta_bound_B_nonsingular(pp, orig, pst)
        assert e.valid
        assert e.value >= exact_subspace_sin(pair, pert, orig, pst)
        r = sin_theta_bound_regular(pp, orig, pst)
        assert r.value >= exact_subspace_sin(pair, pert, orig, pst)
        ev = eig_bound_semisimple(pp, orig, pst, i, j)
        lam, lam_t = orig.blocks[i].eig, pst.blocks[j].eig
        if lam.imag * lam_t.imag < 0:
            lam_t = lam_t.conjugate()
        if ev.valid:
            assert ev.value >= abs(lam_t - lam) / abs(lam)
            checked += 1
    assert checked > 90


def test_ui_bounds_dominate_when_gap_certified():
    rng = np.random.default_rng(8)
    seen = 0
    for _ in range(60):
        pair = rand_pair(rng, 4, real_only=True)
        pert = perturb(pair, rng, 1e-8)
        orig = structure_from_pair(pair)
        orig, pst, _, _ = grouped(pair, pert, orig.blocks[0].eig)
        mu, split = sin_theta_bound_ui(PairPerturbation(pair, pert), orig, pst)
        if mu.status != "ok":
            continue
        seen += 1
        ex = exact_subspace_sin(pair, pert, orig, pst)
        assert mu.value >= ex and split.value >= ex
    assert seen > 10


@pytest.mark.parametrize("c", [2.5, -3.0])
def test_scaling_covariance(c):
    rng = np.random.default_rng(9)
    pair = rand_pair(rng, 4)
    pert = perturb(pair, rng, 1e-8)
    orig = structure_from_pair(pair)
    o1, p1, i, j = grouped(pair, pert, orig.blocks[0].eig)
    sp = MatrixPair(c * pair.A, c * pair.B)
    st_ = MatrixPair(c * pert.A, c * pert.B)
    o2, p2, i2, j2 = grouped(sp, st_, orig.blocks[0].eig)
    a = sin_theta_bound_B_nonsingular(PairPerturbation(pair, pert), o1, p1).value
    b = sin_theta_bound_B_nonsingular(PairPerturbation(sp, st_), o2, p2).value
    assert b == pytest.approx(a, rel=1e-8)
    a = eig_bound_semisimple(PairPerturbation(pair, pert), o1, p1, i, j).value
    b = eig_bound_semisimple(PairPerturbation(sp, st_), o2, p2, i2, j2).value
    assert b == pytest.approx(a, rel=1e-8)


def test_halving_perturbation_does_not_increase_bound():
    rng = np.random.default_rng(10)
    pair = rand_pair(rng, 4)
    dA, dB = 1e-7 * rand_herm(rng, 4), 1e-7 * rand_herm(rng, 4)
    values = []
    for s in (1.0, 0.5):
        pert = MatrixPair(pair.A + s * dA, pair.B + s * dB)
        orig = structure_from_pair(pair)
        o, p, _, _ = grouped(pair, pert, orig.blocks[0].eig)
        values.append(sin_theta_bound_B_nonsingular(PairPerturbation(pair, pert), o, p).value)
    assert values[1] <= values[0]


def test_singular_B_falls_back_to_regular():
    blocks = [BlockSpec(Kind.R1, 1, 1), BlockSpec(Kind.R3, 1, 1, 2.0), BlockSpec(Kind.R3, 1, -1, -3.0)]
    X = np.eye(3) + 0.1 * np.ones((3, 3))
    pair = pair_from_structure(blocks, X)
    s = EigStructure(tuple(blocks), X, frozenset({1}))
    e = sin_theta_bound_B_nonsingular(PairPerturbation(pair, pair), s, s)
    assert e.status == "fallback" and e.value == 0


def test_jordan_lhs():
    assert jordan_lhs(0.0, 0.0, 2, 1) == 0.0
    g, gt = 0.01, 0.02
    assert jordan_lhs(g, gt, 1, 1) == pytest.approx(g * gt / math.hypot(g, gt))
    assert JORDAN_GAP_LIMIT == pytest.approx(0.21922, abs=1e-5)


def _jordan_pair(rng):
    blocks = [BlockSpec(Kind.R3, 2, 1, 2.0), BlockSpec(Kind.R3, 1, -1, -4.0), BlockSpec(Kind.R3, 1, 1, 7.0)]
    X = np.eye(4) + 0.2 * rng.standard_normal((4, 4))
    return blocks, X, pair_from_structure(blocks, X)


def test_jordan_bound_zero_perturbation():
    rng = np.random.default_rng(0)
    blocks, X, pair = _jordan_pair(rng)
    s = EigStructure(tuple(blocks), X, frozenset({0}))
    e = eig_bound_jordan(PairPerturbation(pair, pair), s, s, 0, 0)
    assert e.value == 0 and e.factors["lhs"] == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_jordan_bound_certified_inequality(seed):
    rng = np.random.default_rng(seed)
    blocks, X, pair = _jordan_pair(rng)
    orig = EigStructure(tuple(blocks), X, frozenset({0}))
    pert = perturb(pair, rng, 1e-9)
    pst = structure_from_pair(pert)
    w = sla.eigvals(pert.A, pert.B)
    near = sorted(range(len(pst.blocks)), key=lambda k: abs(pst.blocks[k].eig - 2.0))[:2]
    pst = pst.with_group1(set(near))
    pp = PairPerturbation(pair, pert)
    for j in near:
        e = eig_bound_jordan(pp, orig, pst, 0, j)
        lam_t = w[np.argmin(np.abs(w - pst.blocks[j].eig))]
        d = abs(lam_t - 2.0)
        lhs = jordan_lhs(d / 2.0, d / abs(lam_t), 2, 1)
        if e.status == "ok":
            assert lhs <= e.value


def test_jordan_precondition_flag():
    rng = np.random.default_rng(1)
    blocks, X, pair = _jordan_pair(rng)
    orig = EigStructure(tuple(blocks), X, frozenset({0}))
    far = [BlockSpec(Kind.R3, 2, 1, 3.0), *blocks[1:]]
    pert = EigStructure(tuple(far), X, frozenset({0}))
    e = eig_bound_jordan(PairPerturbation(pair, pair_from_structure(far, X)), orig, pert, 0, 0)
    assert e.status == "precondition-violated"

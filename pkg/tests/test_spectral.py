"""Generalized eigenvalue pencil of the linearized quadratic form, and the
stability certificate built on the verification reports."""

import numpy as np
import pytest

from saddlecheck.candidate import CandidateParams
from saddlecheck.checks import run_inequality_suite, verify_supersolution
from saddlecheck.spectral import (CertificateError, assemble,
                                  eigenvector_field, min_eigenvalue,
                                  rayleigh_quotient, report_digest,
                                  stability_certificate)


def test_stiffness_symmetric_and_mass_positive(sol_m4_coarse):
    asm = assemble(sol_m4_coarse)
    K = asm.stiffness
    assert abs(K - K.T).max() == 0.0
    assert np.all(asm.mass.diagonal() > 0.0)
    assert asm.n_dof == int((asm.node_index >= 0).sum())


def test_eigenvalue_signs_by_dimension(solved):
    # instability for m <= 3, positivity for m >= 4
    expected_sign = {1: -1, 2: -1, 3: -1, 4: 1, 5: 1, 6: 1}
    for m, sign in expected_sign.items():
        est = min_eigenvalue(assemble(solved(m, 12.0, 0.1)))
        assert np.sign(est.lambda_min) == sign, (m, est.lambda_min)
        assert est.residual < 1e-10


def test_dense_oracle_agrees_with_sparse(solved):
    asm = assemble(solved(2, 8.0, 0.2))
    sparse = min_eigenvalue(asm)
    dense = min_eigenvalue(asm, dense=True)
    assert dense.lambda_min == pytest.approx(sparse.lambda_min, rel=5e-2)
    # on this coarse grid the agreement is in fact much tighter
    assert dense.lambda_min == pytest.approx(sparse.lambda_min, abs=1e-9)


def test_eigenvalue_decreases_with_domain_size(solved):
    # Dirichlet truncation: enlarging the domain can only lower the minimum
    lams = [min_eigenvalue(assemble(solved(2, R, 0.1))).lambda_min
            for R in (8.0, 12.0, 16.0)]
    assert lams[0] > lams[1] > lams[2]
    # and the sequence is settling (truncation error decays)
    assert abs(lams[2] - lams[1]) < abs(lams[1] - lams[0])


def test_eigenvalue_h_refinement(solved):
    # m = 2: coarse and fine estimates within 10%
    coarse = min_eigenvalue(assemble(solved(2, 12.0, 0.1))).lambda_min
    fine = min_eigenvalue(assemble(solved(2, 12.0, 0.05))).lambda_min
    assert coarse == pytest.approx(fine, rel=0.1)


def test_ground_state_symmetric(sol_m4_coarse):
    asm = assemble(sol_m4_coarse)
    est = min_eigenvalue(asm)
    v = eigenvector_field(asm, est)
    v = v / np.max(np.abs(v))
    assert np.max(np.abs(v - v.T)) < 1e-6


def test_rayleigh_quotient_upper_bounds(sol_m4_coarse):
    asm = assemble(sol_m4_coarse)
    est = min_eigenvalue(asm)
    # any test field gives an upper bound for lambda_min
    rq = rayleigh_quotient(asm, sol_m4_coarse.u_s + sol_m4_coarse.u_t)
    assert rq >= est.lambda_min
    # the eigenvector itself reproduces the eigenvalue
    rq_min = rayleigh_quotient(asm, eigenvector_field(asm, est))
    assert rq_min == pytest.approx(est.lambda_min, rel=1e-8)


def test_certificate_roundtrip_and_refusals(sol_m4_coarse):
    import dataclasses

    cand = CandidateParams(n=8)
    sup = verify_supersolution(sol_m4_coarse, cand)
    suite = run_inequality_suite(sol_m4_coarse)
    reports = [sup] + suite
    cert = stability_certificate(sol_m4_coarse, cand, reports)
    assert cert["schema"] == "stability-certificate/1"
    assert cert["n"] == 8 and cert["m"] == 4
    assert cert["conclusion"] == "stable"
    assert cert["report_ids"][0] == sup.id
    assert len(cert["report_sha256"]) == len(reports)

    # hashes validate, and a tampered hash is refused
    hashes = [report_digest(r) for r in reports]
    stability_certificate(sol_m4_coarse, cand, reports, hashes)
    bad = list(hashes)
    bad[0] = "0" * 64
    with pytest.raises(CertificateError):
        stability_certificate(sol_m4_coarse, cand, reports, bad)

    # failed prerequisite
    failed = dataclasses.replace(sup, passed=False)
    with pytest.raises(CertificateError):
        stability_certificate(sol_m4_coarse, cand, [failed] + suite)

    # missing supersolution report
    with pytest.raises(CertificateError):
        stability_certificate(sol_m4_coarse, cand, suite)

    # empty report list
    with pytest.raises(CertificateError):
        stability_certificate(sol_m4_coarse, cand, [])


def test_certificate_dimension_mismatch(sol_m1):
    with pytest.raises(CertificateError):
        stability_certificate(sol_m1, CandidateParams(n=8), [])

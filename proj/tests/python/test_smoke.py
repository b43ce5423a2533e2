# Copyright (C) 2026 The fhellm Authors
# Licensed under the Apache License, Version 2.0
import math

import numpy as np
import pytest

import fhellm


def test_evaluator_levels_and_rotation():
    ev = fhellm.Evaluator(fhellm.SimParams(slot_count=4, noise_bits=None))
    ct = ev.encrypt([1.0, 2.0, 3.0, 4.0])
    assert ct.level == 12
    assert ev.decrypt(ev.rotate(ct, 1)) == [2.0, 3.0, 4.0, 1.0]
    sq = ev.mul(ct, ct)
    assert sq.level == 11
    assert ev.decrypt(sq) == [1.0, 4.0, 9.0, 16.0]
    assert ev.ledger()["ct_rotations"] == 1


def test_level_exhaustion_raises():
    ev = fhellm.Evaluator(fhellm.SimParams(slot_count=2, top_level=1,
                                           boot_level=1, noise_bits=None))
    ct = ev.mul_plain(ev.encrypt([1.0, 1.0]), [2.0, 3.0])
    with pytest.raises(fhellm.NeedsBootstrap):
        ev.mul_plain(ct, [1.0, 1.0])


def test_matrix_permutations():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(fhellm.sigma(m), [[1, 2], [4, 3]])
    assert np.array_equal(fhellm.tau(m), [[1, 4], [3, 2]])
    r = fhellm.random_matrix(4, 4, 3)
    assert np.array_equal(fhellm.tau_pow(r, 4), r)


def test_bit_permutations():
    assert fhellm.bit_reverse(1, 3) == 4
    assert fhellm.perm_g(1) == 4
    assert fhellm.perm_h(1) == 1024
    assert all(fhellm.bitrev_properties().values())


def test_matrix_products():
    r = fhellm.pcmm_check(d=16, ell=2)
    assert r["level_drop"] == 1
    assert r["ct_rotations"] == 6
    assert r["max_abs_error"] < 16 * 2.0 ** -38
    c = fhellm.ccmm_check(d=4)
    assert c["level_drop"] == 3


def test_fit_and_softmax():
    p = fhellm.chebyshev_fit("exp", -32.78 / 4, 0.0, 15)
    assert p["sup_error"] < 2.0 ** -13
    assert len(p["coeffs"]) == 16
    y = fhellm.softmax_clear([0.0, 0.0, 0.0, 0.0])
    assert y == pytest.approx([0.25] * 4)
    s = fhellm.softmax_eval(d=128)
    assert s["max_abs_error"] < 2.0 ** -12
    assert s["main_levels_used"] == 8
    assert s["main_bootstraps"] == 0


def test_pipeline():
    r = fhellm.prefill_equiv(ntok=32, ptok=24, decode_steps=2)
    assert r["passed"]
    a = fhellm.attention_demo(d=8, noise_bits=30)
    assert a["passed"]
    assert a["max_abs_error"] < 2.0 ** -8
    names = [ph["name"] for ph in a["phases"]["phases"]]
    assert "softmax" in names
    assert math.isfinite(a["max_abs_error"])

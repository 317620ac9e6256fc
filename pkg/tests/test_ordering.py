from __future__ import annotations

import math

import numpy as np
import pytest

from compactify.compactification import build_compactification
from compactify.extension import Verdict
from compactify.functions import Cheb, Cos, Tanh
from compactify.ordering import (
    ChebOfCoordinate,
    ComparisonWitness,
    CopyCoordinate,
    Incomparable,
    apply_witness,
    compare,
    compose_mappings,
    enlarge,
    equivalence_check,
    _witness_from_mapping,
)

from conftest import SMALL


# full-resolution companions of the session gamma model; the coarse SMALL
# tails leave the mapped remainder clouds too sparse for the onto check
@pytest.fixture(scope="module")
def tanh_cos2():
    return build_compactification((Tanh(), Cos(2.0, 0.0)))


@pytest.fixture(scope="module")
def tanh_cos4():
    return build_compactification((Tanh(), Cos(4.0, 0.0)))


def test_self_comparison_is_the_identity_witness(small_gamma):
    w = compare(small_gamma, small_gamma)
    assert isinstance(w, ComparisonWitness)
    assert w.mapping == (CopyCoordinate(0), CopyCoordinate(1))
    assert w.residual == 0.0
    assert w.onto_defect == 0.0


def test_harmonic_coordinate_is_recognized(gamma_model, tanh_cos2):
    w = compare(gamma_model, tanh_cos2)
    assert isinstance(w, ComparisonWitness)
    assert w.mapping == (CopyCoordinate(0), ChebOfCoordinate(2, 1))
    assert w.residual <= 1e-9
    assert w.onto_defect <= 2.0 * tanh_cos2.params.cluster_radius


def test_negated_cosine_parameters_name_the_same_function(small_gamma):
    negated = build_compactification((Tanh(), Cos(-1.0, 0.0)), SMALL)
    w = compare(small_gamma, negated)
    assert isinstance(w, ComparisonWitness)
    assert w.mapping == (CopyCoordinate(0), CopyCoordinate(1))


def test_explicit_cheb_coordinate_is_recognized(small_gamma):
    wrapped = build_compactification((Tanh(), Cheb(3, Cos())), SMALL)
    w = compare(small_gamma, wrapped)
    assert isinstance(w, ComparisonWitness)
    assert w.mapping == (CopyCoordinate(0), ChebOfCoordinate(3, 1))


def test_incommensurable_frequency_is_incomparable(small_gamma):
    other = build_compactification((Tanh(), Cos(math.sqrt(2.0), 0.0)), SMALL)
    res = compare(small_gamma, other)
    assert isinstance(res, Incomparable)
    assert "no coordinate" in res.reason or "cannot" in res.reason or res.reason


def test_distinct_embeddings_are_incomparable(small_two_point, small_one_point):
    assert isinstance(compare(small_two_point, small_one_point), Incomparable)
    assert isinstance(compare(small_one_point, small_two_point), Incomparable)
    assert not equivalence_check(small_two_point, small_one_point)


def test_apply_witness_reproduces_the_smaller_embedding(gamma_model, tanh_cos2):
    w = compare(gamma_model, tanh_cos2)
    mapped = apply_witness(w, gamma_model.image_points)
    target = tanh_cos2.embedding.embed_array(gamma_model.image_params)
    assert np.max(np.abs(mapped - target)) <= 1e-9
    one = apply_witness(w, gamma_model.image_points[17])
    assert one.shape == (2,)
    assert np.array_equal(one, mapped[17])


def test_composed_mappings_match_direct_comparison(gamma_model, tanh_cos2, tanh_cos4):
    w_ab = compare(gamma_model, tanh_cos2)
    w_bc = compare(tanh_cos2, tanh_cos4)
    assert isinstance(w_ab, ComparisonWitness)
    assert isinstance(w_bc, ComparisonWitness)
    composed = compose_mappings(w_bc.mapping, w_ab.mapping)
    assert composed == (CopyCoordinate(0), ChebOfCoordinate(4, 1))
    direct = compare(gamma_model, tanh_cos4)
    assert isinstance(direct, ComparisonWitness)
    assert direct.mapping == composed
    # the composed mapping is itself a valid witness, checked numerically
    w = _witness_from_mapping(gamma_model, tanh_cos4, composed)
    assert isinstance(w, ComparisonWitness)
    assert w.residual <= 1e-9


def test_wrong_mapping_is_rejected_by_the_residual_check(small_gamma, small_two_point):
    # white box: squaring the tanh coordinate is not the identity
    bogus = (ChebOfCoordinate(2, 0),)
    res = _witness_from_mapping(small_gamma, small_two_point, bogus)
    assert isinstance(res, Incomparable)
    assert "residual" in res.reason


def test_equivalence_up_to_cosine_sign(small_gamma):
    negated = build_compactification((Tanh(), Cos(-1.0, 0.0)), SMALL)
    assert equivalence_check(small_gamma, negated)
    assert equivalence_check(small_gamma, small_gamma)


def test_enlarge_by_incommensurable_cosine_is_strict(small_two_point):
    res = enlarge(small_two_point, Cos(math.sqrt(2.0), 0.0))
    assert res.strict
    assert res.old_report.verdict is Verdict.FAILS_TO_EXTEND
    assert isinstance(res.witness, ComparisonWitness)
    assert res.witness.residual == 0.0
    assert len(res.model.remainder) > len(small_two_point.remainder)
    assert len(res.model.family) == 2


def test_enlarge_by_existing_member_changes_nothing(small_gamma):
    res = enlarge(small_gamma, Cos())
    assert not res.strict
    assert res.old_report.verdict is Verdict.EXTENDS_BY_PROJECTION
    assert tuple(res.model.family) == tuple(small_gamma.family)
    assert equivalence_check(res.model, small_gamma)


def test_enlarge_by_derivable_function_is_not_strict(small_gamma):
    # cos(2x) already extends through T_2 of the cosine coordinate, so the
    # bigger model is no strict step upward
    res = enlarge(small_gamma, Cos(2.0, 0.0))
    assert not res.strict
    assert res.old_report.verdict is not Verdict.FAILS_TO_EXTEND
    assert isinstance(res.witness, ComparisonWitness)
    assert len(res.model.family) == 3

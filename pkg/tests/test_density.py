import math

import numpy as np
import pytest

from autrep.density import (
    DensityCertificate,
    SearchBudget,
    certify_dense,
    links,
    omega_member,
    omega_tilde_search,
    opnorm,
    rational_angle_margin,
    redundant_heuristic,
    replay_certificate,
    strongly_redundant,
)
from autrep.sl2 import GroupElement, Representation, random_su2

BUDGET = SearchBudget(max_word_length=5, max_candidates=400, time_cap_s=30.0)


def rotation(theta):
    return GroupElement([[math.cos(theta), -math.sin(theta)],
                         [math.sin(theta), math.cos(theta)]])


def sanov_pair():
    return [GroupElement([[1, 2], [0, 1]]), GroupElement([[1, 0], [2, 1]])]


def dense_real_pair():
    return [rotation(0.5), GroupElement([[2, 1], [1, 1]])]


class TestRationalAngleMargin:
    def test_rational_angles_have_zero_margin(self):
        assert rational_angle_margin(math.pi / 2) < 1e-12
        assert rational_angle_margin(math.pi / 3) < 1e-12

    def test_irrational_angle(self):
        # best q <= 64 approximation of 0.5/pi is 7/44, about 6.4e-5 away
        assert 1e-5 < rational_angle_margin(0.5) < 1e-4


class TestOpnorm:
    def test_matches_svd(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            want = np.linalg.svd(m, compute_uv=False)[0]
            assert abs(opnorm(m) - want) < 1e-10


class TestCertifyDense:
    def test_identity_alone_elementary(self):
        v = certify_dense([GroupElement.identity()], BUDGET)
        assert v.status == "likely_not_dense" and v.reason == "elementary"

    def test_irrational_rotation_plus_hyperbolic_dense(self):
        v = certify_dense(dense_real_pair(), BUDGET, seed=0)
        assert v.dense
        assert v.report["ad_rank"] == 9
        assert replay_certificate(v.certificate)

    def test_discrete_pair_never_dense(self):
        for seed in range(10):
            v = certify_dense(sanov_pair(), BUDGET, seed=seed)
            assert v.status != "dense"

    def test_certificate_json_round_trip(self):
        v = certify_dense(dense_real_pair(), BUDGET, seed=1)
        text = v.certificate.dumps()
        back = DensityCertificate.loads(text)
        assert replay_certificate(back)
        assert back.dumps() == text

    def test_tampered_certificate_fails(self):
        v = certify_dense(dense_real_pair(), BUDGET, seed=2)
        obj = v.certificate.to_obj()
        obj["spanning_words"] = obj["spanning_words"][:2]
        assert not replay_certificate(DensityCertificate.from_obj(obj))

    def test_monotone_under_extension(self):
        S = dense_real_pair()
        v = certify_dense(S, BUDGET, seed=3)
        assert v.dense
        v2 = certify_dense(S + [GroupElement.identity()], BUDGET, seed=3)
        assert v2.dense

    def test_su2_pair_dense(self):
        rng = np.random.default_rng(4)
        v = certify_dense([random_su2(rng), random_su2(rng)], BUDGET, seed=4)
        assert v.dense
        assert v.certificate.witness["kind"] == "elliptic-irrational"

    def test_cyclic_group_not_dense(self):
        g = GroupElement([[2, 1], [1, 1]])
        v = certify_dense([g, g @ g], BUDGET, seed=5)
        assert v.status == "likely_not_dense"
        assert v.reason == "elementary"

    def test_reducible_span_reason(self):
        # common fixed point at infinity: upper triangular pair is elementary
        S = [GroupElement([[2, 1], [0, 0.5]]), GroupElement([[1, 1], [0, 1]])]
        v = certify_dense(S, BUDGET, seed=6)
        assert v.status == "likely_not_dense"
        assert v.reason in ("elementary", "reducible-span")

    def test_conjugation_equivariance(self):
        S = dense_real_pair()
        h = GroupElement([[1.5, 0.25], [1.0, 5 / 6]])
        Sc = [h @ g @ h.inverse() for g in S]
        v1 = certify_dense(S, BUDGET, seed=7)
        v2 = certify_dense(Sc, BUDGET, seed=7)
        assert v1.status == v2.status == "dense"
        # the searched word stream is value-independent, so the spanning
        # words coincide and the certificates are conjugate
        w1 = [str(w.letters) for w in v1.certificate.spanning_words]
        w2 = [str(w.letters) for w in v2.certificate.spanning_words]
        assert w1 == w2

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            certify_dense([], BUDGET)

    def test_mixed_fields_rejected(self):
        with pytest.raises(ValueError):
            certify_dense([GroupElement.identity("real"),
                           GroupElement.identity("complex")], BUDGET)


class TestOmega:
    def test_superset_of_dense_stays_dense(self):
        v = omega_member(dense_real_pair(), GroupElement.identity(), BUDGET, seed=0)
        assert v.dense

    def test_cyclic_power_not_dense(self):
        g = GroupElement([[2, 1], [1, 1]])
        v = omega_member([g], g @ g, BUDGET, seed=0)
        assert not v.dense

    def test_elliptic_plus_hyperbolic(self):
        v = omega_member([rotation(0.5)], GroupElement([[2, 1], [1, 1]]), BUDGET, seed=0)
        assert v.dense


class TestOmegaTilde:
    def test_strongly_redundant_triple_has_witness(self):
        rng = np.random.default_rng(9)
        trip = [random_su2(rng) for _ in range(3)]
        res = omega_tilde_search(trip, BUDGET, seed=9)
        assert res.witness is not None
        # replay: each drop-one subtuple plus the witness is dense
        for i in range(3):
            sub = [trip[j] for j in range(3) if j != i] + [res.witness]
            assert certify_dense(sub, BUDGET, seed=9).dense

    def test_triangular_family_still_completable(self):
        # a common fixed point of S does not block: each drop-one pair is
        # nondiscrete (parabolic cascade), so a generic completion exists
        S = [GroupElement([[2, 1], [0, 0.5]]), GroupElement([[1, 1], [0, 1]]),
             GroupElement([[3, 1], [0, 1 / 3]])]
        res = omega_tilde_search(S, SearchBudget(5, 300, 20.0), seed=0)
        assert res.witness is not None

    def test_identity_padding_blocks(self):
        # dropping the only nontrivial coordinate leaves <id, id, g> = <g>,
        # cyclic for every candidate: structurally impossible
        rot = GroupElement(np.array([[0.6 + 0.8j, 0], [0, 0.6 - 0.8j]]), "su2")
        S = [GroupElement.identity("su2"), GroupElement.identity("su2"), rot]
        res = omega_tilde_search(S, SearchBudget(4, 150, 10.0), seed=0, max_attempts=4)
        assert res.witness is None
        assert "blocking_counts" in res.report

    def test_dense_pair_plus_identity(self):
        rng = np.random.default_rng(10)
        S = [random_su2(rng), random_su2(rng), GroupElement.identity("su2")]
        res = omega_tilde_search(S, BUDGET, seed=10)
        assert res.witness is not None

    def test_small_tuple_rejected(self):
        with pytest.raises(ValueError):
            omega_tilde_search(dense_real_pair(), BUDGET)


class TestStronglyRedundant:
    def test_random_su2_triple(self):
        rng = np.random.default_rng(11)
        rep = Representation([random_su2(rng) for _ in range(3)])
        out = strongly_redundant(rep, BUDGET, seed=11)
        assert out.strongly_redundant
        assert len(out.subtuple_verdicts) == 3

    def test_all_equal_images_false(self):
        rng = np.random.default_rng(12)
        g = random_su2(rng)
        rep = Representation([g, g, g])
        out = strongly_redundant(rep, BUDGET, seed=12)
        assert not out.strongly_redundant

    def test_identity_coordinate_detail(self):
        rng = np.random.default_rng(13)
        rep = Representation([random_su2(rng), random_su2(rng),
                              GroupElement.identity("su2")])
        out = strongly_redundant(rep, BUDGET, seed=13)
        # dropping coordinate 3 leaves the dense pair; dropping a dense-pair
        # member leaves pair-with-identity, which is cyclic-like
        assert out.subtuple_verdicts[2].dense
        assert not out.strongly_redundant

    def test_rank_guard(self):
        with pytest.raises(ValueError):
            strongly_redundant(Representation(dense_real_pair()), BUDGET)


class TestRedundantHeuristic:
    def test_strongly_redundant_gives_identity_witness(self):
        rng = np.random.default_rng(14)
        rep = Representation([random_su2(rng) for _ in range(3)])
        res = redundant_heuristic(rep, BUDGET, seed=14)
        assert res.status == "redundant"
        assert res.automorphism.is_identity()
        assert replay_certificate(res.certificate)

    def test_duplicate_coordinate(self):
        rng = np.random.default_rng(15)
        g, h = random_su2(rng), random_su2(rng)
        rep = Representation([g, g, h])
        res = redundant_heuristic(rep, BUDGET, seed=15)
        assert res.status == "redundant"
        # replay through the witness automorphism: the claimed subtuple of
        # the transformed representation is dense
        from autrep.sl2 import act
        moved = act(res.automorphism, rep)
        sub = [moved.images[j] for j in range(3) if j != res.dropped_index]
        assert certify_dense(sub, BUDGET, seed=15).dense

    def test_schottky_not_found(self):
        rep = Representation(sanov_pair())
        res = redundant_heuristic(rep, SearchBudget(5, 150, 20.0), seed=16,
                                  max_chain_length=1)
        assert res.status == "not_found"

    def test_cyclic_not_found(self):
        g = GroupElement.identity("su2")
        rep = Representation([g, g, g])
        res = redundant_heuristic(rep, SearchBudget(4, 60, 10.0), seed=17,
                                  max_chain_length=1)
        assert res.status == "not_found"


class TestLinks:
    def test_strongly_redundant_links_itself(self):
        rng = np.random.default_rng(18)
        rep = Representation([random_su2(rng) for _ in range(3)])
        out = links(rep, rep, BUDGET, seed=18)
        assert out.links
        assert len(out.per_k) == 2

    def test_identity_psi_fails_structurally(self):
        rng = np.random.default_rng(19)
        phi = Representation([random_su2(rng) for _ in range(3)])
        psi = Representation([GroupElement.identity("su2")] * 3)
        out = links(phi, psi, BUDGET, seed=19)
        assert not out.links
        # k = n-1 mixed tuple is phi-prefix plus psi(x_n) = identity: that
        # one may be dense, but k = 1 uses only psi coordinates
        assert not out.per_k[0].dense

    def test_random_dense_pair_links(self):
        rng = np.random.default_rng(20)
        phi = Representation([random_su2(rng) for _ in range(3)])
        psi = Representation([random_su2(rng) for _ in range(3)])
        out = links(phi, psi, BUDGET, seed=20)
        assert out.links

    def test_rank_mismatch(self):
        rng = np.random.default_rng(21)
        phi = Representation([random_su2(rng) for _ in range(3)])
        psi = Representation([random_su2(rng) for _ in range(2)])
        with pytest.raises(ValueError):
            links(phi, psi, BUDGET)

import json
import math

import numpy as np
import pytest

from minent.channels import (dephasing1, depolarizing, identity_channel,
                             make_named_channel, replacer, unitary_channel)
from minent.dynamical import channel_min_entropy
from minent.linalg import (DensityOperator, basis_state, maximally_entangled,
                           maximally_mixed, pauli)
from minent.thermo import (K_B, AdversarialBound, CostReport, WorkCost,
                           adversarial_erasure_bound, channel_costs,
                           resource_eras_cost_state, resource_prep_cost_state,
                           sum_bound_check, work_extraction_ledger)

from conftest import random_two_qubit_states

PI = maximally_mixed(2)
PHI = maximally_entangled(2)


def product(a, b):
    return DensityOperator(np.kron(a.matrix, b.matrix), (a.dim, b.dim))


KET00 = product(basis_state(2, 0), basis_state(2, 0))


class TestWorkCost:
    def test_joule_conversion_exact(self):
        w = WorkCost(2.5, 310.0)
        assert w.joules == 2.5 * K_B * 310.0 * math.log(2)

    def test_room_temperature_bit(self):
        w = work_extraction_ledger(1, 300.0)
        assert abs(w.joules) == pytest.approx(2.871e-21, rel=1e-3)
        assert w.extractable()

    def test_ledger_shapes(self):
        assert work_extraction_ledger(0, 300.0).bits == 0.0
        assert work_extraction_ledger(2, 300.0).bits == pytest.approx(
            2 * work_extraction_ledger(1, 300.0).bits)
        assert work_extraction_ledger(3, 77.0, "erase").bits == 3.0

    def test_temperature_validation(self):
        with pytest.raises(ValueError):
            WorkCost(1.0, 0.0)
        with pytest.raises(ValueError):
            work_extraction_ledger(-1, 300.0)


class TestStateCosts:
    def test_pure_product_free(self):
        assert resource_prep_cost_state(KET00, 0, 300).bits \
            == pytest.approx(0.0, abs=1e-9)
        assert resource_eras_cost_state(KET00, 0, 300).bits \
            == pytest.approx(0.0, abs=1e-12)

    def test_entangled_costs(self):
        assert resource_prep_cost_state(PHI, 0, 300).bits == pytest.approx(1.0)
        assert resource_eras_cost_state(PHI, 0, 300).bits == pytest.approx(-1.0)

    def test_free_state_extracts(self):
        sig = DensityOperator(np.array([[0.65, 0.1], [0.1, 0.35]]))
        rho = product(PI, sig)
        assert resource_prep_cost_state(rho, 0, 300).bits == pytest.approx(-1.0)
        assert resource_eras_cost_state(rho, 0, 300).bits == pytest.approx(1.0)

    def test_mu_flags(self):
        w = resource_prep_cost_state(PHI, 0.1, 300)
        assert w.certification == "certified-upper"
        assert w.bits <= 1.0 + 1e-9  # smoothing can only cheapen preparation
        with pytest.raises(ValueError):
            resource_prep_cost_state(PHI, 1.0, 300)


class TestSumBound:
    def test_entangled_zero_sum(self):
        rep = sum_bound_check(PHI, 0.0)
        assert rep.passed
        assert rep.sum_bits == pytest.approx(0.0, abs=1e-9)

    def test_pure_product(self):
        rep = sum_bound_check(KET00, 0.0)
        assert rep.passed and rep.sum_bits == pytest.approx(0.0, abs=1e-9)

    def test_random_audit(self):
        for rho in random_two_qubit_states(91, 40):
            assert sum_bound_check(rho, 0.0).passed

    def test_positive_mu(self):
        rep = sum_bound_check(PHI, 0.25)
        assert rep.lower_bound_bits == pytest.approx(
            math.log2(1 - 0.25 / (1 - 0.0625)) - 2)
        assert rep.passed and not rep.vacuous

    def test_vacuous_regime(self):
        golden = (math.sqrt(5) - 1) / 2
        rep = sum_bound_check(PHI, golden + 0.01)
        assert rep.vacuous and rep.passed


class TestChannelCosts:
    def test_identity(self):
        rep = channel_costs(identity_channel(2), 0.0, 300.0, 24, 5)
        assert rep.prep_cost.bits == pytest.approx(1.0, abs=1e-9)
        assert rep.eras_cost.bits == pytest.approx(1.0, abs=1e-9)

    def test_uniform_replacer(self):
        rep = channel_costs(replacer(PI), 0.0, 300.0, 24, 5)
        assert rep.prep_cost.bits == pytest.approx(-1.0, abs=1e-9)
        assert rep.eras_cost.bits == pytest.approx(-1.0, abs=1e-9)

    def test_unitary_matches_identity(self):
        rep = channel_costs(unitary_channel(pauli("y")), 0.0, 300.0, 24, 5)
        assert rep.prep_cost.bits == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("p,expect", [(0.5, 0.0), (0.75, -1.0),
                                          (0.1, math.log2(1.8))])
    def test_depolarizing_closed_form(self, p, expect):
        rep = channel_costs(depolarizing(p), 0.0, 300.0, 32, 5)
        assert rep.prep_cost.bits == pytest.approx(expect, abs=1e-7)
        assert rep.eras_cost.bits == pytest.approx(expect, abs=1e-7)

    def test_zero_error_identity_never_exceeded(self):
        for fam in ("depolarizing", "dephasing1", "dephasing2"):
            ch = make_named_channel(fam, p=0.35)
            rep = channel_costs(ch, 0.0, 300.0, 48, 5)
            target = -channel_min_entropy(ch)
            assert rep.prep_cost.bits <= target + 1e-6
            assert rep.eras_cost.bits <= target + 1e-6

    def test_positive_mu_certified(self):
        rep = channel_costs(depolarizing(0.3), 0.08, 300.0, 12, 5)
        assert rep.certification == "certified-upper"
        # the certified cost ceilings are asserted inside channel_costs
        assert rep.eras_cost.bits <= -rep.s_min_channel + math.log2(0.92) + 1e-6

    def test_json_schema(self):
        rep = channel_costs(identity_channel(2), 0.0, 300.0, 8, 5)
        payload = rep.to_json()
        assert set(payload) == {"mu", "temperature_kelvin", "prep_bits",
                                "eras_bits", "prep_joules", "eras_joules",
                                "s_min_channel", "certification"}
        json.dumps(payload)

    def test_report_invariant_enforced(self):
        with pytest.raises(ValueError):
            CostReport(WorkCost(0.3, 300.0), WorkCost(-0.3, 300.0),
                       mu=0.0, s_min_channel=0.0)


class TestAdversarialBound:
    def test_identity_arithmetic(self):
        rep = adversarial_erasure_bound(identity_channel(2), 0.0, 4.0, 300.0)
        assert rep.bound.bits == pytest.approx(5.0)
        assert rep.probability == pytest.approx(0.5)
        assert rep.valid

    def test_replacer(self):
        rep = adversarial_erasure_bound(replacer(PI), 0.0, 4.0, 300.0)
        assert rep.bound.bits == pytest.approx(3.0)

    def test_large_delta_limit(self):
        eps = 0.001
        rep = adversarial_erasure_bound(identity_channel(2), eps, 60.0, 300.0)
        assert rep.probability == pytest.approx(1 - math.sqrt(12 * eps), abs=1e-4)

    def test_invalid_probability_flagged(self):
        rep = adversarial_erasure_bound(identity_channel(2), 0.5, 0.1, 300.0)
        assert not rep.valid
        assert rep.probability == 0.0

    def test_reconciliation_with_resource_cost(self):
        # thermodynamic bound >= resource-theoretic zero-error cost + margin
        for fam, p in (("depolarizing", 0.3), ("dephasing2", 0.6)):
            ch = make_named_channel(fam, p=p)
            eras = channel_costs(ch, 0.0, 300.0, 16, 5).eras_cost.bits
            adv = adversarial_erasure_bound(ch, 0.01, 2.0, 300.0)
            assert adv.bound.bits >= eras - 1e-6

    def test_validation(self):
        with pytest.raises(ValueError):
            adversarial_erasure_bound(identity_channel(2), -0.1, 1.0, 300.0)
        with pytest.raises(ValueError):
            adversarial_erasure_bound(identity_channel(2), 0.1, 0.0, 300.0)

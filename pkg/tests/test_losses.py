import numpy as np
import pytest

from pagelayout.channels import ChannelMaps
from pagelayout.losses import LossBreakdown, dice_loss, masked_mse, total_loss

from oracles import dice_oracle, masked_mse_oracle, total_loss_oracle


def random_pair(rng, h=8, w=8):
    def cm():
        u = lambda: rng.uniform(0, 1, (h, w)).astype(np.float32)
        return ChannelMaps(u(), u(), rng.uniform(0, 20, (h, w)).astype(np.float32), rng.uniform(0, 8, (h, w)).astype(np.float32), u())

    gt = cm()
    # binary-ish gt masks are the realistic case; keep base partly zero
    base = (rng.uniform(0, 1, (h, w)) > 0.6).astype(np.float32)
    gt = ChannelMaps(base, gt.end, gt.asc, gt.des, gt.block)
    return cm(), gt


class TestMaskedMse:
    def test_equal_maps_zero(self):
        rng = np.random.default_rng(0)
        m = rng.uniform(0, 5, (4, 4))
        assert masked_mse(m, m, np.ones((4, 4))) == 0.0

    def test_hand_example(self):
        pred = np.array([[10.0, 99.0]])
        gt = np.array([[12.0, 0.0]])
        mask = np.array([[1.0, 0.0]])
        assert masked_mse(pred, gt, mask) == 4.0

    def test_empty_mask_is_zero(self):
        assert masked_mse(np.ones((3, 3)), np.zeros((3, 3)), np.zeros((3, 3))) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            masked_mse(np.ones((2, 2)), np.ones((3, 3)), np.ones((2, 2)))

    def test_off_mask_perturbation_bit_exact(self):
        rng = np.random.default_rng(1)
        pred = rng.uniform(0, 10, (8, 8))
        gt = rng.uniform(0, 10, (8, 8))
        mask = (rng.uniform(0, 1, (8, 8)) > 0.5).astype(float)
        ref = masked_mse(pred, gt, mask)
        nudged = pred.copy()
        nudged[mask == 0] = rng.uniform(-1e6, 1e6, int((mask == 0).sum()))
        assert masked_mse(nudged, gt, mask) == ref


class TestDice:
    def test_identity_zero(self):
        m = np.array([[1.0, 0.0], [1.0, 0.0]])
        assert dice_loss(m, m) == 0.0

    def test_disjoint_one(self):
        a = np.array([[1.0, 0.0]])
        b = np.array([[0.0, 1.0]])
        assert dice_loss(a, b) == 1.0

    def test_hand_example(self):
        pred = np.array([[1.0, 0.0], [0.0, 0.0]])
        gt = np.array([[1.0, 1.0], [0.0, 0.0]])
        assert dice_loss(pred, gt) == pytest.approx(1 / 3)

    def test_both_empty_zero(self):
        z = np.zeros((2, 2))
        assert dice_loss(z, z) == 0.0

    def test_range_property(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            pred = rng.uniform(0, 1, (6, 6))
            gt = (rng.uniform(0, 1, (6, 6)) > 0.5).astype(float)
            assert 0.0 <= dice_loss(pred, gt) <= 1.0

    def test_matches_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pred = rng.uniform(0, 1, (5, 5))
            gt = (rng.uniform(0, 1, (5, 5)) > 0.5).astype(float)
            assert dice_loss(pred, gt) == pytest.approx(dice_oracle(pred, gt), abs=1e-12)


class TestTotalLoss:
    def test_equal_maps_zero_total(self):
        rng = np.random.default_rng(4)
        pred, gt = random_pair(rng)
        breakdown = total_loss(gt, gt)
        assert breakdown.total == 0.0

    def test_lambda_zero_leaves_dice_terms(self):
        rng = np.random.default_rng(5)
        pred, gt = random_pair(rng)
        b = total_loss(pred, gt, lam=0.0)
        assert b.total == pytest.approx(b.dice_base + b.dice_end + b.dice_block, abs=1e-15)

    def test_breakdown_invariant(self):
        rng = np.random.default_rng(6)
        pred, gt = random_pair(rng)
        b = total_loss(pred, gt)
        assert b.total == pytest.approx(
            b.lam * (b.masked_mse_asc + b.masked_mse_des) + b.dice_base + b.dice_end + b.dice_block,
            abs=1e-12,
        )

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            pred, gt = random_pair(rng)
            got = total_loss(pred, gt).total
            want = total_loss_oracle(pred, gt, 0.01)
            assert got == pytest.approx(want, rel=1e-6, abs=1e-9)

    def test_mask_is_gt_base(self):
        rng = np.random.default_rng(8)
        pred, gt = random_pair(rng)
        ref = total_loss(pred, gt)
        # perturb pred heights off the gt base mask: loss must not move
        asc = pred.asc.copy()
        asc[gt.base == 0] = 999.0
        pred2 = ChannelMaps(pred.base, pred.end, asc, pred.des, pred.block)
        assert total_loss(pred2, gt).masked_mse_asc == ref.masked_mse_asc

    def test_as_dict_uses_lambda_key(self):
        b = LossBreakdown(0, 0, 0, 0, 0, 0.01, 0)
        assert "lambda" in b.as_dict()

"""Loss kernels and adaptive scale estimation.

The loss combines masked MSE on the two height channels (evaluated only at
ground-truth baseline pixels) with Dice losses on the three segmentation
channels, weighted by lambda = 0.01.  The scale estimator reads the median
ascender off a first detection pass and derives the factor that brings the
page toward the 12 px operating point.
"""

from pagelayout import SynthConfig, corrupt, estimate_scale, generate, render_gt, total_loss

layout = generate(SynthConfig(seed=11, ascender_range=(16.0, 24.0)))
gt = render_gt(layout)

print("loss of a perfect prediction:")
print(f"  total = {total_loss(gt, gt).total}")

pred = corrupt(gt, noise_sigma=0.08, blur_size=3, dropout_prob=0.03, rng_seed=1)
breakdown = total_loss(pred, gt)
print("\nloss of a degraded prediction:")
for name in ("masked_mse_asc", "masked_mse_des", "dice_base", "dice_end", "dice_block"):
    print(f"  {name:15s} {getattr(breakdown, name):.4f}")
print(f"  total           {breakdown.total:.4f}  (lambda = {breakdown.lam})")

est = estimate_scale(gt)
print(f"\nscale estimate: median ascender {est.median_ascender:.1f} px")
print(f"  resample by {est.scale_factor:.3f} to reach the {est.target_ascender:.0f} px operating point")

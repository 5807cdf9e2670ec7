"""Extraction from imperfect maps: noise, blur and baseline dropout.

The corruptor stands in for an imperfect predictor.  Dropout tears
baselines apart; the anisotropic connected components bridge small gaps and
the in-block line merging step repairs the larger ones, so scores stay high
even though the raw maps are visibly degraded.
"""

from pagelayout import SynthConfig, corrupt, evaluate, extract_page, generate, render_gt

layout = generate(SynthConfig(seed=7))
clean = render_gt(layout)
noisy = corrupt(clean, noise_sigma=0.1, blur_size=3, dropout_prob=0.05, rng_seed=7)

kept = noisy.base[clean.base == 1.0]
print(f"ground truth: {len(layout.lines())} lines in {len(layout.blocks)} blocks")
print(f"stroke pixels surviving dropout: {(kept > 0.5).mean():.1%}")
print(f"background noise level: {noisy.base[clean.base == 0].mean():.3f}")

without_merge = extract_page(noisy, merge=False)
with_merge = extract_page(noisy, merge=True)
print(f"\nfragments before in-block merging: {len(without_merge.lines())}")
print(f"lines after merging:               {len(with_merge.lines())}")

for tag, pred in (("no merge", without_merge), ("merged", with_merge)):
    scores = evaluate(pred, layout)
    print(f"  {tag:9s} baseline F={scores.baseline[2]:.4f}  line F={scores.line[2]:.4f}  block F={scores.block[2]:.4f}")

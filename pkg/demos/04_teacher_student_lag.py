"""Why a policy trained on a critic lags behind it.

Two identical MLPs learn a 4-class blob problem. M1 fits the labels; M2 only
ever sees M1's predictions. M2's accuracy trails M1's for the first epochs,
which is the motivation for letting the critic pick among policy samples.

Run: python3 demos/04_teacher_student_lag.py
"""

from cgar.distill import generate_dataset, mean_curves, nearest_center_accuracy, run_demo

ds = generate_dataset(seed=0)
print(f"{len(ds.train_idx)} train / {len(ds.eval_idx)} eval points, "
      f"nearest-centre ceiling {nearest_center_accuracy(ds):.3f}\n")

for variant in ("ce", "mse"):
    epochs, m1, m2 = mean_curves(run_demo(variant, seeds=range(5), epochs=10))
    print(f"M1 loss = {variant}, M2 loss = soft cross-entropy to M1 (mean of 5 seeds)")
    print("  epoch   M1     M2     gap")
    for e, a, b in zip(epochs, m1, m2):
        print(f"  {e:5d}  {a:.3f}  {b:.3f}  {a - b:+.3f}")
    print()

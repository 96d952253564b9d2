"""Denoising walkthrough: TV limit vs first- and second-order coupling.

Builds a piecewise-affine test image, corrupts it with sigma=40 Gaussian
noise, and denoises it three ways.  The quadratic-smoothness coupling
models beat the TV limit on ramps because they do not staircase; the
second-order model reconstructs affine regions almost exactly.

Run:  python3 demos/denoising.py
"""

import pathlib

import numpy as np

from couplevar import (
    ModelParams,
    SolverConfig,
    add_gaussian_noise,
    mse,
    psnr,
    solve,
    synth_affine,
    write_image,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

SIZE = 128
SIGMA = 40.0

clean = synth_affine(SIZE, SIZE, "affine")
noisy = add_gaussian_noise(clean, SIGMA, seed=11)
write_image(clean, OUT / "clean.pgm")
write_image(noisy, OUT / "noisy.pgm")
print(f"{SIZE}x{SIZE} piecewise-affine image, noise sigma={SIGMA}")
print(f"noisy input:        mse={mse(noisy, clean):8.2f}  psnr={psnr(noisy, clean):.2f} dB")

# Parameters hand-tuned per method on this image; tol loosened a little
# because the MSE stops moving long before the residual bottoms out.
runs = [
    ("tv", SolverConfig(ModelParams(1, 1.0, 40.0, 1e-6), mode="tv", tol=1e-5)),
    ("first-order", SolverConfig(ModelParams(1, 30.0, 40.0, 1e-6), tol=1e-5)),
    ("second-order", SolverConfig(ModelParams(2, 1000.0, 40.0, 1e-6), tol=1e-5)),
]

results = {}
for name, cfg in runs:
    res = solve(noisy, cfg)
    results[name] = res.u
    write_image(res.u, OUT / f"denoised_{name.replace('-', '_')}.pgm")
    print(
        f"{name:<18s} mse={mse(res.u, clean):8.2f}  "
        f"psnr={psnr(res.u, clean):.2f} dB  "
        f"({res.iterations} iterations, converged={res.converged})"
    )

# A single row makes the staircasing difference visible: the TV profile
# is piecewise constant on the ramp, the second-order profile is linear.
row = SIZE // 3
with open(OUT / "row_profiles.csv", "w") as fh:
    fh.write("x,clean,noisy,tv,first_order,second_order\n")
    for i in range(SIZE):
        fh.write(
            f"{i},{clean[row, i]:.3f},{noisy[row, i]:.3f},"
            f"{results['tv'][row, i]:.3f},"
            f"{results['first-order'][row, i]:.3f},"
            f"{results['second-order'][row, i]:.3f}\n"
        )
print(f"row {row} profiles written to {OUT / 'row_profiles.csv'}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4))
    x = np.arange(SIZE)
    ax.plot(x, clean[row], "k-", lw=1, label="clean")
    ax.plot(x, results["tv"][row], label="tv")
    ax.plot(x, results["first-order"][row], label="first order")
    ax.plot(x, results["second-order"][row], label="second order")
    ax.set_xlabel("x")
    ax.set_ylabel(f"intensity along row {row}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "row_profiles.png", dpi=120)
    print(f"plot written to {OUT / 'row_profiles.png'}")
except ImportError:
    print("matplotlib not installed; skipping the profile plot")

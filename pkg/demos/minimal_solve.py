"""Seven noisy correspondences from a moving rolling-shutter camera with
radial distortion, solved by both minimal solvers."""

import numpy as np

from rspose.driver import IterConfig, run
from rspose.evaluate import pose_errors
from rspose.synth import SynthConfig, generate


def main():
    ds = generate(SynthConfig(rot_velocity_max=20, trans_velocity_max=0.05, lambda_true=-0.3,
                              noise_px=0.5, seed=3))
    print(f"true f {ds.model.f:.1f} px, lambda {ds.model.lam * ds.scale**2:+.3f} (normalized)")
    for solver in ("R7Pf", "R7Pfr"):
        est = run(ds.corrs, IterConfig(solver_kind=solver))
        e = pose_errors(est, ds)
        print(
            f"{solver:6s} f {est.model.f:8.1f} px  lambda {est.model.lam * ds.scale**2:+.3f}  "
            f"rot err {e.rot_err_deg:.3f} deg  focal err {100 * e.focal_rel_err:.2f}%  "
            f"iterations {est.iterations}  residual history "
            + " ".join(f"{r:.1e}" for r in est.residual_history)
        )


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()

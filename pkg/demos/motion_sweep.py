"""Accuracy against camera motion: rotation up to 30 deg/frame together with
translation up to a tenth of the distance per frame, 1 px noise."""

import sys

from rspose.driver import IterConfig
from rspose.experiments import SweepSpec, sweep
from rspose.synth import SynthConfig


def main(trials=100):
    spec = SweepSpec(
        "rot_velocity", 30.0, trials=trials,
        base=SynthConfig(noise_px=1.0, orientation_mode="identity"),
        iter_config=IterConfig(init="identity"), joint_trans_max=0.1,
    )
    print("deg/frame solver  mean rot  median rot  mean focal  median focal  converged")
    for r in sweep(spec):
        print(
            f"{r['value']:9.1f} {r['solver']:6s} {r['mean_rot_err_deg']:9.3f} "
            f"{r['median_rot_err_deg']:11.3f} {100 * r['mean_focal_rel_err']:10.2f}% "
            f"{100 * r['median_focal_rel_err']:12.2f}% {100 * r['converged_fraction']:9.1f}%"
        )


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 100)

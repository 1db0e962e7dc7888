"""Continuous-time encoder exp(t(Phi - I)) on the repetition code: distance to the codeword over time."""

import argparse

import numpy as np

from ftde.channels import cde_generator, compose_encoder, encoded_state, evolve_cde, product_state, trace_distance
from ftde.code import synthesize_plan
from ftde.fixtures import builtin


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--code", default="repetition3")
    ap.add_argument("--upload", default="+")
    ap.add_argument("--t-max", type=float, default=50.0)
    ap.add_argument("--steps", type=int, default=51)
    args = ap.parse_args()

    plan = synthesize_plan(builtin(args.code))
    phi = compose_encoder(plan)
    gen = cde_generator(phi)
    rho0 = product_state(plan.full_nominal_spec(args.upload))
    target = encoded_state(product_state(args.upload), plan)
    print(f"{'t':>8s} {'trace distance':>16s} {'closed form':>16s}")
    for t in np.linspace(0, args.t_max, args.steps):
        d = trace_distance(evolve_cde(gen, rho0, t), target)
        # Phi is idempotent, so exp(tL) = e^{-t} I + (1 - e^{-t}) Phi
        closed = trace_distance(np.exp(-t) * rho0 + (1 - np.exp(-t)) * phi(rho0), target)
        print(f"{t:8.2f} {d:16.3e} {closed:16.3e}")


if __name__ == "__main__":
    main()

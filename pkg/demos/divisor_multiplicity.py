"""The smallest end-to-end run: a line bundle over a disc with the weight
log|x1|^4.  The limit Segre current is twice the integration current along
x1 = 0; the script shows the mass converging, the multiplicity estimate at
the origin, and the fixed/moving split.

Run from the repository root:

    python3 demos/divisor_multiplicity.py
"""

from segrelab import (
    BundleSpec,
    DiagonalQasMetric,
    GridChart,
    decompose,
    segre_current,
)


def main() -> None:
    chart = GridChart(1, center=(0j,), half_widths=(1.0,), resolution=128)
    spec = BundleSpec(base_dim=1, rank=1, chart=chart)
    # exponent 2 on the single generator x1: the weight is log|x1|^4
    metric = DiagonalQasMetric.from_descriptors([(2, ["x1"], 0.0)], base_dim=1)

    result = segre_current(
        spec,
        metric,
        degrees=[0, 1],
        eps_schedule=[4.0 ** (-j) for j in range(9)],
        probe_points=[(0j,)],
    )

    print("eps        mass(s_1)")
    for eps, table in zip(result.eps, result.mass_tables[1]):
        print(f"{eps:9.3e}  {table['full']:.6f}")
    print(f"converged: {result.converged[1]}")

    est = result.lelong[0]
    print(f"multiplicity at 0: {est.value:.4f} (plateau found: {est.plateau_found})")

    decompose(result, metric)
    block = result.decomposition[1]
    for entry in block["fixed"]:
        print(
            f"fixed component [{entry['cycle']}]: estimate {entry['estimate']:.4f},"
            f" rounded multiplicity {entry['multiplicity']}"
        )
    print(f"moving mass: {block['moving_mass']:.2e}")


if __name__ == "__main__":
    main()

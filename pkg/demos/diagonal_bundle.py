"""The rank-2 diagonal bundle over the bidisc, metric induced by the
morphism diag(x1, x2).  Both layers run side by side:

  * the exact layer predicts s_1 = [x1=0] + [x2=0], s_2 = [origin],
    c_2 = [origin], and c_2 in the degeneracy-aware mode = -[origin];
  * the grid engine recovers the same numbers as tube and ball masses.

This is the small configuration (24 points per axis, seconds of
single-core time; the coarse grid blurs the pointwise densities but the
masses hold up).  The verification suite `chernex` runs the full-size
version with frozen tolerances.
"""

from segrelab import (
    BundleSpec,
    FiberRule,
    GridChart,
    MorphismInducedMetric,
    chern_current,
    chernex_reference,
    decompose,
    segre_current,
)


def main() -> None:
    chart = GridChart(2, center=(0j, 0j), half_widths=(1.0, 1.0), resolution=24)
    spec = BundleSpec(base_dim=2, rank=2, chart=chart)
    metric = MorphismInducedMetric.from_strings([["x1", "0"], ["0", "x2"]], base_dim=2)

    reference = chernex_reference()
    print("exact layer:")
    for key in ("s1", "s2", "c2", "c2_Z"):
        print(f"  {key} = {reference[key]}")

    result = segre_current(
        spec,
        metric,
        degrees=[0, 1, 2],
        eps_schedule=[4.0 ** (-j) for j in range(6)],
        probe_points=[(0j, 0j)],
        fiber_rule=FiberRule(n_radial=8, n_angular=6),
    )
    decompose(result, metric)

    print("\ngrid engine:")
    for est in result.lelong:
        print(f"  s_{est.degree} density at origin: {est.value:.3f}")
    for entry in result.decomposition[1]["fixed"]:
        print(
            f"  s_1 along [{entry['cycle']}]: estimate {entry['estimate']:.3f},"
            f" multiplicity {entry['multiplicity']}"
        )

    for mode in ("series", "alternative_Z"):
        chern = chern_current(
            spec, metric, mode=mode, segre_result=result, probe_points=[(0j, 0j)]
        )
        mass = chern.mass_tables[2]["ball0"]
        print(f"  c_2 point mass ({mode}): {mass:+.3f}")


if __name__ == "__main__":
    main()

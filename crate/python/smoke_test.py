"""Quick check that the extension module loads and its main entry points work."""

import json
import math
import tempfile

import angwalk_py as aw


def main():
    spec = aw.IncrementSpec.from_json(
        json.dumps(
            {
                "dimension": 2,
                "form": "coordinate_product",
                "laws": [{"kind": "constant", "value": 1.0}, {"kind": "rademacher"}],
            }
        )
    )
    assert spec.dimension == 2

    traj, est = aw.simulate(spec, 4096, seed=7)
    assert traj.n_steps == 4096
    assert traj.to_csv().startswith("n,")
    direction = traj.final_direction()
    assert direction[0] > 0.95, direction
    again, _ = aw.simulate(spec, 4096, seed=7)
    assert again.to_csv() == traj.to_csv()
    assert len(est.verdicts()) == len(est.grid())

    assert aw.s_hull_contains([[1, 0], [0, 1]], [1, 1])
    assert not aw.s_hull_contains([[1, 0], [0, 1]], [-1, -1])
    (start, end), = aw.s_hull_arcs([[1, 0], [0, 1]])
    assert math.isclose(end - start, math.pi / 2, abs_tol=1e-9)

    r = aw.inscribed_radius([[1, 0], [0, 1], [-1, 0], [0, -1]])
    assert math.isclose(r, math.sqrt(0.5), rel_tol=1e-9), r

    u, verdict = aw.pruitt("poly:0.5", 32)
    assert len(u) == 33 and verdict in ("CONVERGENT_TREND", "DIVERGENT_TREND", "INCONCLUSIVE")

    with tempfile.TemporaryDirectory() as out:
        cfg = {"spec": json.loads(spec.to_json()), "n_steps": 1000, "base_seed": 1}
        summary = json.loads(aw.run_experiment(json.dumps(cfg), out))
        assert summary

    print("smoke test ok")


if __name__ == "__main__":
    main()

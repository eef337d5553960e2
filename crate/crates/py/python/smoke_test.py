"""Smoke test for the hotspot extension module: python python/smoke_test.py"""

import math

import hotspot


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    gamma, am = hotspot.critical_constants(0.1, 0.0046667)
    close(gamma, 10.31, 0.01)
    close(am, 0.61, 0.005)
    close(hotspot.epsilon0_square(), 1 / (3 * math.sqrt(3)), 1e-15)

    p = hotspot.ModelParams()
    a_star, n_star, residual = hotspot.steady_state(p)
    close(a_star, 0.700978, 5e-7)
    assert n_star == 1.0 and abs(residual) < 1e-14

    r = hotspot.check_global_condition(p, 0.7, 1.0, 1.0)
    close(r.lhs, 0.6122, 5e-5)
    assert r.holds and r.route == "smallness"
    assert not hotspot.check_global_condition(p, 0.5, 1.0, 1.0).any_route_holds()

    assert hotspot.choose_c(2.0, 0.1) is None
    close(hotspot.choose_c(1.0, 0.1), 1 / 1.1, 1e-12)

    pr = hotspot.probe(seed=3, n=32, max_mode=4)
    assert pr["ratio_l1"] <= math.sqrt(1.5) and pr["ratio_k"] <= 12

    grid = hotspot.GridSpec(1.0, 16)
    tr = hotspot.simulate(p, grid, t_end=0.1, dt=5e-3, output_every=0.05, amplitude=0.02, mode=(1, 2))
    assert tr.status == "completed", tr
    assert len(tr.records) == 3
    assert tr.max_mass_step_residual <= 1e-10
    a = tr.final_a
    assert len(a) == 16 and len(a[0]) == 16

    try:
        hotspot.ModelParams(atilde=-1.0)
    except hotspot.HotspotError as e:
        assert "positivity" in str(e)
    else:
        raise AssertionError("negative atilde accepted")

    print("smoke test passed:", tr)


if __name__ == "__main__":
    main()

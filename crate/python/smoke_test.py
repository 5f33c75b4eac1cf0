"""Quick end-to-end check of the blt_lab extension module."""

import json
import math
import tempfile

import blt_lab


def main():
    box = blt_lab.Signal.generator("box", 64)
    z = blt_lab.zak(box, 64)
    d = z.frame_diagnostics()
    assert abs(d["A"] - 1) < 1e-12 and abs(d["B"] - 1) < 1e-12

    hat = blt_lab.Signal.generator("hat", 128)
    zh = blt_lab.zak(hat, 128)
    d = zh.frame_diagnostics()
    assert d["min_abs"] < 1e-6, d
    assert zh.degree()["degree"] == 1
    assert zh.qp_residual() < 1e-12
    assert abs(zh.l2_norm() - hat.l2_norm()) < 1e-12

    g = blt_lab.Signal.generator("gaussian", 64)
    assert blt_lab.zak_fourier(g, 64)["deviation"] < 1e-6

    f = blt_lab.zak(blt_lab.Signal.generator("gaussian", 32), 32).window(-1, 2, 0.5, 8.0)
    ratio = f.bmo_direct() / f.bmo_lp()
    assert 1 / 20 <= ratio <= 20, ratio
    scales, values = f.vmo_modulus()
    assert all(a > b for a, b in zip(scales, scales[1:]))
    assert all(math.isfinite(v) for v in values)

    try:
        blt_lab.Signal(0.0, -1.0, [1 + 0j])
    except ValueError as e:
        assert "step" in str(e)
    else:
        raise AssertionError("negative step accepted")

    with tempfile.TemporaryDirectory() as out:
        report = blt_lab.run_scenario(json.dumps({"scenario": "analyze", "signal": {"kind": "hat"}}), out)
        assert report["passed"], report

    print("blt_lab smoke test passed")


if __name__ == "__main__":
    main()

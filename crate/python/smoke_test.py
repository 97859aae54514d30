"""Smoke test for the spatialmix Python bindings.

Build and install the extension first:

    (cd crates/python && maturin build --release -o dist && pip install dist/*.whl)
"""

import random
import tempfile

import spatialmix_py as sm


def close(a, b, tol):
    return len(a) == len(b) and all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    d = sm.normalize_direction(-90.0, 100.0)
    assert abs(d.azimuth - 90.0) < 1e-9 and abs(d.elevation - 80.0) < 1e-9, d
    assert abs(sm.angular_distance(sm.Direction(0, 0), sm.Direction(90, 0)) - 90.0) < 1e-9

    ir_set = sm.IrSet.synthesize("lebedev50", 48000, 128, seed=1)
    assert len(ir_set) == 50 and ir_set.ir_len == 128

    query = sm.Direction(77.0, 33.0)
    for mode in sm.INTERPOLATION_MODES:
        plan = sm.plan(ir_set, query, mode)
        assert abs(plan.weight_sum() - 1.0) < 1e-9, plan
        assert plan.mode_used != "auto"
    plan = sm.plan(ir_set, query, "three_point")
    left, right = sm.blend(ir_set, plan)
    assert len(left) == len(right) == 128

    rng = random.Random(0)
    signal = [rng.uniform(-1, 1) for _ in range(300)]
    out_l, out_r, used = sm.render_source_binaural(signal, query, ir_set, "three_point")
    assert close(out_l, sm.convolve(signal, left), 1e-9)
    assert close(out_r, sm.convolve(signal, right), 1e-9)

    for pan in (-1.0, -0.3, 0.0, 0.5, 1.0):
        gl, gr = sm.pan_constant_power(pan)
        assert abs(gl * gl + gr * gr - 1.0) < 1e-12

    layout = sm.get_layout("7.1.4")
    assert len(layout) == 12 and layout[3][0] == "LFE" and layout[3][1] is None
    assert "5.1" in sm.supported_layouts()

    tracks = [
        sm.Track("a", signal, level=0.5, azimuth_deg=30.0, pan=-0.5),
        sm.Track("b", signal[::-1], level=0.4, reverb=0.2, azimuth_deg=-60.0, elevation_deg=20.0, pan=0.5),
    ]
    mix = sm.mix_tracks_binaural(tracks, ir_set, layout="5.1")
    assert len(mix.left) == len(mix.right) > 0 and len(mix.plans) == 2
    stereo = sm.mix_tracks_stereo(tracks, normalize="peak")
    assert abs(stereo.peak - 1.0) < 1e-12

    channels = [[0.0] * 32 for _ in range(6)]
    channels[2][0] = 1.0
    surround = sm.render_surround_to_binaural(channels, "5.1", ir_set, output_layout="7.1.4")
    assert len(surround.left) == 32 + 128 - 1

    with tempfile.TemporaryDirectory() as root:
        ir_set.write(root)
        back = sm.IrSet.load(root, "SYNTH", "HRIR", 48000)
        assert back.point(7)[1] == ir_set.point(7)[1]
        path = f"{root}/mix.wav"
        sm.write_wav(path, 48000, [mix.left, mix.right], "float32")
        rate, chans = sm.read_wav(path)
        assert rate == 48000 and len(chans) == 2

    try:
        sm.get_layout("6.1")
    except ValueError as e:
        assert "5.1" in str(e)
    else:
        raise AssertionError("unsupported layout accepted")

    print("python smoke test: ok (%d modes, %d-point set)" % (len(sm.INTERPOLATION_MODES), len(ir_set)))


if __name__ == "__main__":
    main()

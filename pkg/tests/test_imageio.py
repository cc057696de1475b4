import numpy as np
import pytest
from PIL import Image

from blurfisher.errors import DomainError
from blurfisher.fisher import synth_natural_image
from blurfisher.imageio import (
    linear_to_srgb,
    pad_to_pow2_square,
    read_luminance,
    read_visual_map,
    srgb_to_linear,
    write_png_gray,
    write_png_rgb,
    write_visual_map,
)
from blurfisher.vrf import LuminanceImage, VisualMap, make_psf, visual_map


def test_srgb_round_trip():
    v = np.linspace(0, 1, 257)
    assert np.max(np.abs(linear_to_srgb(srgb_to_linear(v)) - v)) < 1e-12


def test_read_8bit_png(tmp_path):
    path = tmp_path / "gray.png"
    data = np.arange(256, dtype=np.uint8).reshape(16, 16)
    Image.fromarray(data).save(path)
    img = read_luminance(path, linearize=False)
    assert img.samples.shape == (16, 16)
    assert img.samples.max() == pytest.approx(255 / 255.0)
    linear = read_luminance(path)
    # sRGB decoding darkens mid-tones
    assert linear.samples[8, 0] < img.samples[8, 0]


def test_read_16bit_png(tmp_path):
    path = tmp_path / "gray16.png"
    data = (np.linspace(0, 65535, 256).astype(np.uint16)).reshape(16, 16)
    Image.fromarray(data).save(path)
    img = read_luminance(path, linearize=False)
    assert img.samples.max() == pytest.approx(1.0)


def test_read_pgm(tmp_path):
    path = tmp_path / "img.pgm"
    data = np.arange(256, dtype=np.uint8).reshape(16, 16)
    Image.fromarray(data).save(path)
    img = read_luminance(path, linearize=False)
    assert img.samples.shape == (16, 16)


def test_write_png_gray_round_trip(tmp_path):
    path = tmp_path / "o.png"
    values = np.random.default_rng(0).random((8, 8))
    write_png_gray(path, values, bits=16)
    back = np.asarray(Image.open(path), dtype=float) / 65535.0
    span = values.max() - values.min()
    assert np.max(np.abs(back * span + values.min() - values)) < 1e-4
    with pytest.raises(DomainError):
        write_png_gray(path, values, bits=12)


def test_write_png_rgb(tmp_path):
    path = tmp_path / "c.png"
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    rgb[..., 0] = 200
    write_png_rgb(path, rgb)
    assert np.array_equal(np.asarray(Image.open(path)), rgb)


def test_pad_to_pow2_square():
    img = LuminanceImage.from_array(np.ones((60, 100)))
    padded = pad_to_pow2_square(img)
    assert padded.samples.shape == (128, 128)
    # padding happens after mean removal, so the pad area is the mean level
    assert padded.samples[90, 90] == 0.0


class TestVisualMapFile:
    def test_round_trip(self, tmp_path):
        img = synth_natural_image(1.0, 32, 8)
        vm = visual_map(img, make_psf(2.5, img.geometry))
        path = tmp_path / "map.vmap"
        write_visual_map(path, vm)
        back = read_visual_map(path)
        assert back.values.shape == vm.values.shape
        assert back.source_neural_spread == pytest.approx(2.5)
        # float32 storage
        assert np.max(np.abs(back.values - vm.values)) < 1e-5 * np.abs(vm.values).max()

    def test_header_layout(self, tmp_path):
        vm = VisualMap(values=np.zeros((2, 3), dtype=complex),
                       geometry=LuminanceImage.from_array(np.zeros((2, 3))).geometry,
                       source_neural_spread=2.5)
        path = tmp_path / "m.vmap"
        write_visual_map(path, vm)
        raw = path.read_bytes()
        assert raw[:4] == b"VMAP"
        assert int.from_bytes(raw[4:8], "little") == 3   # width
        assert int.from_bytes(raw[8:12], "little") == 2  # height
        assert len(raw) == 16 + 2 * 3 * 2 * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.vmap"
        path.write_bytes(b"NOPE" + b"\0" * 12)
        with pytest.raises(DomainError):
            read_visual_map(path)

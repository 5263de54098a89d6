import numpy as np
import pytest

from fasthog import decode_pnm, encode_pgm, encode_ppm
from fasthog.cli import main

from test_detector import minimal_model_text, striped_image


@pytest.fixture
def gray_image_file(tmp_path, rng):
    plane = rng.integers(0, 256, size=(40, 48), dtype=np.uint8)
    path = tmp_path / "img.pgm"
    path.write_bytes(encode_pgm(plane))
    return str(path)


@pytest.fixture
def constant_image_file(tmp_path):
    path = tmp_path / "flat.pgm"
    path.write_bytes(encode_pgm(np.full((40, 48), 77, dtype=np.uint8)))
    return str(path)


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.txt"
    path.write_text(minimal_model_text(bias=1.0))
    return str(path)


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["extract"])  # missing --image
    assert exc.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_file_exits_1(capsys):
    assert main(["extract", "--image", "/nonexistent.pgm"]) == 1
    assert "error" in capsys.readouterr().err


def test_extract_constant_image_all_zero(constant_image_file, capsys):
    rc = main(["extract", "--image", constant_image_file,
               "--window", "16x16", "--stride", "16"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 * 2  # (48-16)/16+1 = 3 by (40-16)/16+1 = 2
    for line in lines:
        fields = line.split()
        assert len(fields) == 2 + 36
        assert all(f == "0" for f in fields[2:])


def test_extract_to_file(gray_image_file, tmp_path):
    out = tmp_path / "dump.txt"
    rc = main(["extract", "--image", gray_image_file, "--window", "16x16",
               "--stride", "8", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].split()[:2] == ["0", "0"]
    assert len(lines[0].split()) == 38


def test_extract_normalized_values_are_floats(gray_image_file, capsys):
    rc = main(["extract", "--image", gray_image_file, "--window", "16x16",
               "--stride", "16", "--norm", "l2"])
    assert rc == 0
    first = capsys.readouterr().out.splitlines()[0].split()
    values = [float(v) for v in first[2:]]
    assert all(0.0 <= v <= 1.0 for v in values)


def test_detect_outputs_and_determinism(gray_image_file, model_file, tmp_path):
    out1, out2, out3 = (tmp_path / n for n in ("a.txt", "b.txt", "c.txt"))
    base = ["detect", "--image", gray_image_file, "--model", model_file,
            "--stride", "8", "--threshold", "0.5", "--seed", "7"]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2)]) == 0
    assert main(base + ["--threads", "4", "--out", str(out3)]) == 0
    assert out1.read_bytes() == out2.read_bytes() == out3.read_bytes()
    line = out1.read_text().splitlines()[0].split()
    assert len(line) == 6
    x, y, w, h = map(int, line[:4])
    assert (w, h) == (16, 16)
    assert float(line[4]) == 1.0  # zero weights, bias 1
    assert float(line[5]) == 1.0  # scale


def test_detect_annotate_burns_boxes(gray_image_file, model_file, tmp_path):
    out = tmp_path / "boxes.ppm"
    rc = main(["detect", "--image", gray_image_file, "--model", model_file,
               "--threshold", "0.5", "--nms-iou", "0.0", "--annotate", str(out)])
    assert rc == 0
    annotated = decode_pnm(out.read_bytes())
    assert annotated.channels == 3
    # at least the first kept box outline is white
    assert (annotated.planes[:, 0, 0:16] == 255).all()
    assert (annotated.planes[:, 0:16, 0] == 255).all()


def test_detect_pyramid_runs(tmp_path, model_file):
    img = tmp_path / "stripes.pgm"
    image = striped_image(64, 64, (16, 16, 32, 32), band=8)
    img.write_bytes(encode_pgm(image.planes[0]))
    rc = main(["detect", "--image", str(img), "--model", model_file,
               "--pyramid", "--scale-step", "2.0", "--stride", "8",
               "--threshold", "0.5", "--out", str(tmp_path / "d.txt")])
    assert rc == 0
    lines = (tmp_path / "d.txt").read_text().strip().splitlines()
    assert lines
    scales = {line.split()[5] for line in lines}
    assert "1" in scales or "2" in scales


def test_bench_small_grid(gray_image_file, capsys):
    rc = main(["bench", "--image", gray_image_file, "--window", "16x16",
               "--stride", "16", "--repeats", "3", "--csv"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "windows: 6" in out
    assert "speedup:" in out
    lines = out.strip().splitlines()
    header, row = lines[-2], lines[-1]
    assert header.startswith("width,height")
    assert len(row.split(",")) == len(header.split(","))


def test_bench_rejects_single_repeat(gray_image_file, capsys):
    assert main(["bench", "--image", gray_image_file, "--window", "16x16",
                 "--repeats", "1"]) == 1
    assert "repeats" in capsys.readouterr().err


def test_bench_no_valid_windows(tmp_path, capsys):
    path = tmp_path / "tiny.pgm"
    path.write_bytes(encode_pgm(np.zeros((8, 8), dtype=np.uint8)))
    assert main(["bench", "--image", str(path), "--window", "16x16",
                 "--repeats", "3"]) == 1


def test_bench_plot_written(gray_image_file, tmp_path, capsys):
    fig = tmp_path / "bench.png"
    rc = main(["bench", "--image", gray_image_file, "--window", "16x16",
               "--stride", "16", "--repeats", "3", "--plot", str(fig),
               "--out", str(tmp_path / "report.txt")])
    assert rc == 0
    assert fig.stat().st_size > 0
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_selfcheck_passes(capsys):
    rc = main(["selfcheck", "--bins", "8", "--trials", "10", "--seed", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
    assert "FAIL" not in out


def test_color_image_roundtrip_through_cli(tmp_path, rng, capsys):
    planes = rng.integers(0, 256, size=(3, 24, 32), dtype=np.uint8)
    path = tmp_path / "color.ppm"
    path.write_bytes(encode_ppm(planes))
    rc = main(["extract", "--image", str(path), "--window", "16x16",
               "--stride", "8", "--bins", "8"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 * 2

"""Quick end-to-end check of the compiled extension.

Build first: pip install --no-build-isolation -e crates/python
"""

import json
import math
import pathlib
import sys

import noisereg

DATA = pathlib.Path(__file__).resolve().parents[1] / "data" / "diabetes.tab"


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def check_channels():
    for kind in ("ad", "pd", "dp"):
        ops = noisereg.kraus_operators(kind, 0.2)
        # sum of E^dagger E is the identity
        for i in range(2):
            for j in range(2):
                s = sum(op[k][i].conjugate() * op[k][j] for op in ops for k in range(2))
                close(abs(s - (1.0 if i == j else 0.0)), 0.0, 1e-12)

    rho = noisereg.DensityMatrix(2)
    rho.ry(0.7, 0)
    rho.rxx(0.3, 0, 1)
    rho.apply_channel("dp", 0.1, 1)
    close(rho.trace(), 1.0, 1e-12)
    assert rho.purity() < 1.0
    assert len(rho.to_list()) == 4


def check_calibrate():
    ad, pd = noisereg.calibrate("25us", "28us", "240ns")
    close(ad, -math.expm1(-240e-9 / 25e-6), 1e-15)
    ad2, _ = noisereg.calibrate(25e-6, 28e-6, 240e-9)
    close(ad, ad2, 1e-15)
    try:
        noisereg.calibrate("25 parsecs", "28us", "240ns")
    except ValueError:
        pass
    else:
        raise AssertionError("bad duration accepted")


def check_model():
    model = noisereg.QnnModel(layers=2)
    assert model.n_params == 16
    params = [0.1 * k for k in range(model.n_params)]
    value, grad = model.value_and_gradient([0.3, -0.2], params)
    close(value, model.forward([0.3, -0.2], params), 1e-12)
    h = 1e-6
    bumped = list(params)
    bumped[3] += h
    lower = list(params)
    lower[3] -= h
    fd = (model.forward([0.3, -0.2], bumped) - model.forward([0.3, -0.2], lower)) / (2 * h)
    close(grad[3], fd, 1e-6)

    dead = noisereg.QnnModel(layers=2, channel="ad", gamma=1.0)
    close(dead.forward([0.3, -0.2], params), 1.0, 1e-12)


def check_training():
    data = noisereg.Dataset.load(str(DATA), seed=7)
    assert len(data.train) == 40 and len(data.validation) == 400
    split = json.loads(data.split_json())
    assert len(split["indices_train"]) == 40
    zero, one = data.baselines()
    assert zero < one

    model = noisereg.QnnModel(layers=1, channel="pd", gamma=0.01)
    rec = noisereg.train(model, data, seed=1, epochs=3)
    assert len(rec.train_mse) == 3 and len(rec.val_mse) == 3
    assert rec.csv.startswith("channel,gamma,seed,epoch,train_mse,val_mse")
    assert json.loads(rec.json)["seed"] == 1

    rows = noisereg.noise_sweep("dp", data, seeds=2, layers=1, epochs=1, grid_min_exp=-1, grid_step=1)
    assert [round(r[0], 12) for r in rows] == [0.0, 0.1, 1.0]

    try:
        noisereg.Dataset.load("/nonexistent/diabetes.tab")
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")


def main():
    check_channels()
    check_calibrate()
    check_model()
    check_training()
    print(f"noisereg {noisereg.__version__}: smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())

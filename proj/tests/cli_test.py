"""CLI integration tests: exit codes, file outputs, manifest reproducibility."""
import json
import os
import subprocess
import sys
import tempfile

CLI = os.path.abspath(sys.argv[1])


def run(args, cwd):
    return subprocess.run([CLI] + args, cwd=cwd, capture_output=True, text=True)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        # usage error: unknown option -> exit 2
        r = run(["simulate", "--nope"], tmp)
        assert r.returncode == 2, r.returncode

        # precondition: eps = 0 -> exit 2 and a pointer at the reduced-flow commands
        r = run(["simulate", "--eps", "0", "--alpha", "0.9", "--xi", "0.5"], tmp)
        assert r.returncode == 2, (r.returncode, r.stderr)
        assert "levelset" in r.stderr or "gamma0" in r.stderr, r.stderr

        # simulate writes t,x,y,z,defect
        r = run(["--outdir", tmp, "simulate", "--eps", "1e-2", "--alpha", "0.9",
                 "--xi", "0.5", "--tmax", "50"], tmp)
        assert r.returncode == 0, r.stderr
        with open(os.path.join(tmp, "simulate.csv")) as f:
            header = f.readline().strip()
        assert header == "t,x,y,z,defect", header
        assert os.path.exists(os.path.join(tmp, "simulate_manifest.json"))

        # determinism: identical config -> byte-identical CSV
        with open(os.path.join(tmp, "simulate.csv"), "rb") as f:
            first = f.read()
        r = run(["--outdir", tmp, "simulate", "--eps", "1e-2", "--alpha", "0.9",
                 "--xi", "0.5", "--tmax", "50"], tmp)
        assert r.returncode == 0
        with open(os.path.join(tmp, "simulate.csv"), "rb") as f:
            second = f.read()
        assert first == second, "simulate.csv is not reproducible"

        # levelset (json format writes the full level-set document too)
        r = run(["--outdir", tmp, "--format", "json", "levelset", "--energy",
                 "0.4", "--xi", "0.5"], tmp)
        assert r.returncode == 0, r.stderr
        with open(os.path.join(tmp, "levelset.csv")) as f:
            assert f.readline().strip() == "y,z"
        ls = json.load(open(os.path.join(tmp, "levelset.json")))
        assert ls["kind"] == "closed" and len(ls["points"]) > 100
        mani = json.load(open(os.path.join(tmp, "levelset_manifest.json")))
        assert mani["kind"] == "closed"
        assert mani["period"] > 0

        # melnikov grid beyond the margin is rejected up front
        r = run(["--outdir", tmp, "melnikov", "--xi", "0.5", "--h-grid",
                 "0.9:0.99:0.01"], tmp)
        assert r.returncode == 2, (r.returncode, r.stderr)

        # melnikov sweep (coarse grid, 2 workers)
        r = run(["--outdir", tmp, "melnikov", "--xi", "0.5", "--h-grid",
                 "0.1:0.3:0.1", "--jobs", "2"], tmp)
        assert r.returncode == 0, r.stderr
        lines = open(os.path.join(tmp, "melnikov.csv")).read().splitlines()
        assert lines[0] == "h,delta_alpha,delta_eps,alpha_M,err"
        assert len(lines) == 4
        for row in lines[1:]:
            vals = [float(v) for v in row.split(",")]
            assert vals[1] > 0 and 0.4 < vals[3] < 0.6

        # hopf
        r = run(["--outdir", tmp, "hopf", "--xi", "0.5", "--eps", "1e-2"], tmp)
        assert r.returncode == 0, r.stderr
        hopf = json.load(open(os.path.join(tmp, "hopf.json")))
        assert abs(hopf["alpha_H"] - 0.4975) < 1e-12
        assert abs(hopf["alpha_H_numeric"] - 0.4975) < 5e-4
        assert hopf["criticality"] == "super"

        # gamma0 corner table carries Q5
        r = run(["--outdir", tmp, "gamma0", "--alpha", "0.9", "--xi", "0.5"], tmp)
        assert r.returncode == 0, r.stderr
        g = json.load(open(os.path.join(tmp, "gamma0.json")))
        q5 = g["corner_chart_coords"]["Q5"]["coords"]
        assert abs(q5[0] + 0.527778) < 1e-5 and abs(q5[1] - 0.027778) < 1e-5
        assert g["max_corner_gap"] <= 1e-8

        # atlas
        r = run(["--outdir", tmp, "atlas", "--xi", "0.5", "--alpha", "0.9"], tmp)
        assert r.returncode == 0, r.stderr
        atlas = json.load(open(os.path.join(tmp, "atlas.json")))
        assert len(atlas["fixed_points"]) == 9

        # cycle (fast setting)
        r = run(["--outdir", tmp, "cycle", "--eps", "1e-2", "--alpha", "0.9",
                 "--xi", "0.5"], tmp)
        assert r.returncode == 0, r.stderr
        cyc = json.load(open(os.path.join(tmp, "cycle.json")))
        assert cyc["stable"] is True
        assert cyc["period"] > 1.0
        assert len(cyc["multipliers"]) == 3

        # smaller eps -> larger y excursions over the same horizon
        def max_y(path):
            with open(path) as f:
                next(f)
                return max(float(line.split(",")[2]) for line in f)

        r = run(["--outdir", tmp, "simulate", "--eps", "1e-5", "--alpha", "0.9",
                 "--xi", "0.5", "--tmax", "100"], tmp)
        assert r.returncode == 0, r.stderr
        y_small_eps = max_y(os.path.join(tmp, "simulate.csv"))
        r = run(["--outdir", tmp, "simulate", "--eps", "1e-2", "--alpha", "0.9",
                 "--xi", "0.5", "--tmax", "100"], tmp)
        assert r.returncode == 0, r.stderr
        y_big_eps = max_y(os.path.join(tmp, "simulate.csv"))
        assert y_small_eps > y_big_eps, (y_small_eps, y_big_eps)

        # bifurcate: two-point alpha sweep
        r = run(["--outdir", tmp, "bifurcate", "--xi", "0.5", "--mode", "alpha",
                 "--grid", "0.7:0.9:0.2", "--eps", "1e-2"], tmp)
        assert r.returncode == 0, r.stderr
        rows = open(os.path.join(tmp, "bifurcation.csv")).read().splitlines()
        assert rows[0] == "param,amplitude,period,max_multiplier,status"
        assert len(rows) == 3
        assert all(row.endswith("ok") for row in rows[1:])

        # gamma0 precondition violation -> exit 2
        r = run(["--outdir", tmp, "gamma0", "--alpha", "0.4", "--xi", "0.5"], tmp)
        assert r.returncode == 2, (r.returncode, r.stderr)

    print("cli integration tests passed")


if __name__ == "__main__":
    main()

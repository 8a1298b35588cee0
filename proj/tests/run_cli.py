#!/usr/bin/env python3
"""Exit-code and artifact checks for the geolab CLI.

usage: run_cli.py GEOLAB SOURCE_DIR WORK_DIR CASE
"""
import json
import pathlib
import shutil
import subprocess
import sys


def run(exe, *args):
    p = subprocess.run([exe, *args], capture_output=True, text=True)
    return p.returncode, p.stdout + p.stderr


def write_config(work, src, name, edit):
    cfg = json.loads((src / "tests" / "data" / "small.json").read_text())
    edit(cfg)
    path = work / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


def expect(cond, msg):
    if not cond:
        print("FAIL", msg)
        sys.exit(1)
    print("ok", msg)


def main():
    exe, src, work, case = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3]), sys.argv[4]
    work = work / case
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    small = src / "tests" / "data" / "small.json"

    if case == "equal_endpoints":
        rc, out = run(exe, "geodesic", "--config", str(src / "configs" / "equal_endpoints.json"), "--out", str(work))
        expect(rc == 0, f"geodesic on equal endpoints exits 0 (got {rc})")
        conv = json.loads((work / "geodesic" / "convergence.json").read_text())
        eps = conv["epsilons"]
        dist = conv["oracle_distance"]
        for e, d in zip(eps, dist):
            expect(d <= e / 8 + 1e-10, f"eps={e}: oracle distance {d:.3e} <= eps/8")
    elif case == "entropy_suite":
        rc, out = run(exe, "verify", "--suite", "entropy", "--config", str(src / "configs" / "default.json"),
                      "--out", str(work))
        expect(rc == 0, f"entropy suite on the default config exits 0 (got {rc})")
    elif case == "coarse_fails":
        rc, out = run(exe, "verify", "--suite", "all", "--config", str(src / "configs" / "coarse.json"),
                      "--out", str(work))
        expect(rc == 3, f"suite all on the coarse config exits 3 (got {rc})")
    elif case == "unknown_suite":
        rc, out = run(exe, "verify", "--suite", "nonsense", "--config", str(small), "--out", str(work))
        expect(rc == 1, f"unknown suite exits 1 (got {rc})")
    elif case == "missing_epsilons":
        cfg = write_config(work, src, "no_eps.json", lambda c: c.pop("epsilons"))
        rc, out = run(exe, "geodesic", "--config", str(cfg), "--out", str(work / "out"))
        expect(rc == 1, f"config without epsilons exits 1 (got {rc})")
        rc, out = run(exe, "mabuchi", "--variant", "k", "--config", str(cfg), "--out", str(work / "out"))
        expect(rc == 1, f"mabuchi variant k without epsilons exits 1 (got {rc})")
    elif case == "unknown_key":
        cfg = write_config(work, src, "bad_key.json", lambda c: c.update(typo_key=1))
        rc, out = run(exe, "geodesic", "--config", str(cfg), "--out", str(work / "out"))
        expect(rc == 1 and "typo_key" in out, f"unknown config key exits 1 and is named (got {rc})")
    elif case == "schemas":
        rc, out = run(exe, "study", "--config", str(small), "--out", str(work / "out"))
        expect(rc in (0, 3), f"study on the small config completes (got {rc})")
        configs = sorted(str(p) for p in (src / "configs").glob("*.json")) + [str(small)]
        p = subprocess.run([sys.executable, str(src / "tests" / "check_schemas.py"), str(src / "schemas"),
                            "--configs", *configs, "--outputs", str(work / "out")], capture_output=True, text=True)
        print(p.stdout, end="")
        expect(p.returncode == 0, "artifacts and configs validate against the schemas")
    else:
        print("unknown case", case)
        sys.exit(2)


if __name__ == "__main__":
    main()

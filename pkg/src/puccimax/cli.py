"""Thin command-line client for the service.

All computation happens behind the HTTP interface: by default the app is
mounted in-process, with ``--server URL`` the same requests go to a running
instance.  The client only reads the config file, posts it, writes returned
artifact files under ``--out`` and sets the exit code (0 ok, 2 when any row
failed to converge, 3 on config errors).
"""

import argparse
import sys

from .runner import write_artifacts


def _client(server):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        # the in-process transport import warns about its own internals
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _read_config(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return None


def _post(client, path, payload):
    """Returns (data, exit_code); data is None when the call failed."""
    try:
        resp = client.post(path, json=payload)
    except Exception as exc:  # remote server unreachable etc.
        print(f"cannot reach service: {exc}", file=sys.stderr)
        return None, 1
    if resp.status_code == 400:
        detail = resp.json().get("detail", resp.text)
        print(f"config error: {detail}", file=sys.stderr)
        return None, 3
    if resp.status_code != 200:
        print(f"service error {resp.status_code}: {resp.text}", file=sys.stderr)
        return None, 1
    return resp.json(), 0


def _print_rows(rows):
    cols = ("eps", "h", "sup_error", "residual", "iterations", "mc_gap", "mean_tau", "converged")
    print("  ".join(f"{c:>12}" for c in cols))
    for r in rows:
        cells = []
        for c in cols:
            v = r.get(c)
            if v is None:
                cells.append(" " * 12)
            elif isinstance(v, bool):
                cells.append(f"{str(v):>12}")
            elif isinstance(v, int):
                cells.append(f"{v:>12d}")
            else:
                cells.append(f"{v:>12.4g}")
        print("  ".join(cells))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="puccimax", description=__doc__)
    parser.add_argument("--server", default=None, help="URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, values_flag=False):
        p.add_argument("--config", required=True, help="path to the experiment config")
        p.add_argument("--out", default="out", help="directory for artifact files")
        p.add_argument("--seed", type=int, default=None, help="override mc.seed")
        if values_flag:
            p.add_argument("--include-values", action="store_true", help="also fetch value-function CSVs")

    p_solve = sub.add_parser("solve", help="solve one eps of the config")
    common(p_solve)
    p_solve.add_argument("--eps-index", type=int, default=0)

    p_sim = sub.add_parser("simulate", help="solve one eps, then Monte Carlo at each x0")
    common(p_sim)
    p_sim.add_argument("--eps-index", type=int, default=0)
    p_sim.add_argument("--n", type=int, default=None, help="override mc.n_playouts")

    p_sweep = sub.add_parser("sweep", help="run the full eps sweep")
    common(p_sweep, values_flag=True)

    p_ver = sub.add_parser("verify-oracles", help="run the oracle self-check battery")
    p_ver.add_argument("--level", choices=("quick", "full"), default="quick")

    p_cmp = sub.add_parser("compare", help="compare two summary.csv files")
    p_cmp.add_argument("summary_a")
    p_cmp.add_argument("summary_b")

    args = parser.parse_args(argv)
    client = _client(args.server)

    if args.verb == "solve":
        text = _read_config(args.config)
        if text is None:
            return 3
        data, code = _post(
            client,
            "/solve",
            {"config_text": text, "eps_index": args.eps_index, "seed": args.seed, "include_values": True},
        )
        if data is None:
            return code
        write_artifacts(data["files"], args.out)
        _print_rows([data["row"]])
        for x0_value in data["value_at"]:
            print(f"value at x0: {x0_value:.10g}")
        print(f"artifacts written to {args.out}")
        return 0 if data["converged"] else 2

    if args.verb == "simulate":
        text = _read_config(args.config)
        if text is None:
            return 3
        data, code = _post(
            client,
            "/simulate",
            {
                "config_text": text,
                "eps_index": args.eps_index,
                "seed": args.seed,
                "n_playouts": args.n,
            },
        )
        if data is None:
            return code
        write_artifacts(data["files"], args.out)
        for est in data["estimates"]:
            gap = est["mean"] - est["dpp_value"]
            print(
                f"x0={est['x0']}  mean={est['mean']:.6g} +- {est['std_error']:.2g}  "
                f"mean_tau={est['mean_tau']:.6g}  dpp_value={est['dpp_value']:.6g}  gap={gap:.3g}"
            )
        return 0 if data["converged"] else 2

    if args.verb == "sweep":
        text = _read_config(args.config)
        if text is None:
            return 3
        data, code = _post(
            client,
            "/sweep",
            {"config_text": text, "seed": args.seed, "include_values": bool(args.include_values)},
        )
        if data is None:
            return code
        write_artifacts(data["files"], args.out)
        _print_rows(data["rows"])
        print(f"artifacts written to {args.out}")
        return 0 if data["all_converged"] else 2

    if args.verb == "verify-oracles":
        data, code = _post(client, "/verify-oracles", {"level": args.level})
        if data is None:
            return code
        for check in data["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"{status}  {check['name']}: {check['detail']}")
        return 0 if data["all_passed"] else 1

    if args.verb == "compare":
        try:
            with open(args.summary_a) as fh:
                a = fh.read()
            with open(args.summary_b) as fh:
                b = fh.read()
        except OSError as exc:
            print(f"cannot read summary: {exc}", file=sys.stderr)
            return 3
        data, code = _post(client, "/compare", {"summary_a": a, "summary_b": b})
        if data is None:
            return code
        print(data["report"], end="")
        return 0

    return 3  # pragma: no cover


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

import argparse
import io
import logging
import sys

from .backends import load_backend
from .serve import serve


def main(argv=None):
    p = argparse.ArgumentParser(prog="pyscorer", description=__doc__)
    p.add_argument("--backend", default="mock", choices=["mock", "neural"])
    p.add_argument("--fwd-model", help="left-to-right causal LM name or path")
    p.add_argument("--bwd-model", help="right-to-left causal LM name or path")
    p.add_argument("--device", default="cpu")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="pyscorer: %(message)s")

    backend = load_backend(args.backend, args.fwd_model, args.bwd_model, args.device)
    inp = io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8", newline="\n")
    out = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="\n")
    serve(backend, inp, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

import json
import logging

PROTO = 1

log = logging.getLogger(__name__)


def _reply(out, obj):
    out.write(json.dumps(obj, ensure_ascii=False) + "\n")
    out.flush()


def _parse(line):
    req = json.loads(line)
    if not isinstance(req, dict):
        raise ValueError("request must be an object")
    rid, direction, text = req.get("id"), req.get("dir"), req.get("text")
    if not isinstance(rid, int) or isinstance(rid, bool):
        raise ValueError("id must be an integer")
    if direction not in ("fwd", "bwd"):
        raise ValueError("dir must be 'fwd' or 'bwd'")
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    return rid, direction, text


def serve(backend, inp, out):
    """Runs the protocol loop until end of input. Returns the number of
    requests answered with a score."""
    hello = inp.readline()
    if not hello:
        return 0
    try:
        proto = json.loads(hello).get("proto")
    except (ValueError, AttributeError):
        proto = None
    if proto != PROTO:
        _reply(out, {"id": None, "error": f"bad handshake {hello.strip()!r}"})
        return 0
    _reply(out, {"proto": PROTO})

    answered = 0
    for line in inp:
        if not line.strip():
            continue
        try:
            rid, direction, text = _parse(line)
        except ValueError as e:
            _reply(out, {"id": None, "error": str(e)})
            continue
        try:
            logp = backend.logp(direction, text)
        except Exception as e:  # backend failures must not kill the loop
            log.exception("scoring failed")
            _reply(out, {"id": None, "error": f"request {rid}: {e}"})
            continue
        _reply(out, {"id": rid, "logp": logp})
        answered += 1
    return answered

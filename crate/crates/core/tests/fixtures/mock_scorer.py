"""Line-delimited JSON scorer used by the integration tests: logp = -len(text)."""
import json
import sys

hello = json.loads(sys.stdin.readline())
assert hello == {"proto": 1}, hello
print(json.dumps({"proto": 1}), flush=True)
for line in sys.stdin:
    req = json.loads(line)
    penalty = 0.5 if req["dir"] == "bwd" else 0.0
    print(json.dumps({"id": req["id"], "logp": -len(req["text"]) - penalty}), flush=True)

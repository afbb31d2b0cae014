import logging
import math

log = logging.getLogger(__name__)


class MockBackend:
    """logp = -(character count); backward scores the reversed text."""

    kind = "MOCK"

    def logp(self, direction, text):
        if direction == "bwd":
            text = text[::-1]
        return -float(len(text))


class NeuralBackend:
    """Causal LM scoring; backward uses a separate right-to-left model that
    is fed the character-reversed text."""

    kind = "NEURAL"

    def __init__(self, fwd_model, bwd_model, device="cpu"):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.device = device
        self.models = {}
        for direction, name in (("fwd", fwd_model), ("bwd", bwd_model)):
            tok = AutoTokenizer.from_pretrained(name)
            model = AutoModelForCausalLM.from_pretrained(name).to(device).eval()
            self.models[direction] = (tok, model)

    def logp(self, direction, text):
        if direction == "bwd":
            text = text[::-1]
        tok, model = self.models[direction]
        torch = self._torch
        bos = tok.bos_token_id if tok.bos_token_id is not None else tok.eos_token_id
        ids = [bos] + tok.encode(text, add_special_tokens=False)
        if len(ids) < 2:
            return 0.0
        x = torch.tensor([ids], device=self.device)
        with torch.no_grad():
            logits = model(x).logits[0, :-1]
        logprobs = torch.log_softmax(logits.double(), dim=-1)
        target = x[0, 1:]
        total = logprobs.gather(1, target.unsqueeze(1)).sum().item()
        return total if math.isfinite(total) else -1e300


def load_backend(kind, fwd_model=None, bwd_model=None, device="cpu"):
    """Builds the requested backend. NEURAL falls back to MOCK with a warning
    when its dependencies or model names are unavailable."""
    if kind.upper() == "MOCK":
        return MockBackend()
    if kind.upper() != "NEURAL":
        raise ValueError(f"unknown backend {kind!r}")
    if not fwd_model or not bwd_model:
        log.warning("neural backend needs --fwd-model and --bwd-model; using MOCK")
        return MockBackend()
    try:
        return NeuralBackend(fwd_model, bwd_model, device)
    except ImportError as e:
        log.warning("neural backend unavailable (%s); using MOCK", e)
        return MockBackend()

"""Fill-mask HTTP server backed by a HuggingFace masked LM.

    python3 python/fill_mask_server.py --model roberta-base --port 8765
    ANTHROSCORE_REFERENCE_ENDPOINT=http://127.0.0.1:8765 cargo test -p anthroscore-cli --test acceptance

POST /fill-mask {"model", "text", "targets"} returns the raw full-vocabulary
softmax at the mask position, summed over the surface variants of each
target (bare and with the leading-space marker, case kept).
"""

import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
import threading

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer


def variants(tokenizer, word):
    vocab = tokenizer.get_vocab()
    forms = [word, "Ġ" + word, "▁" + word, "##" + word]
    return [f for f in forms if f in vocab]


class Model:
    def __init__(self, name):
        self.name = name
        self.tok = AutoTokenizer.from_pretrained(name)
        self.lm = AutoModelForMaskedLM.from_pretrained(name).eval()
        self.lock = threading.Lock()

    def fill(self, text, targets):
        enc = self.tok(text, return_tensors="pt")
        pos = (enc["input_ids"][0] == self.tok.mask_token_id).nonzero().flatten()
        if len(pos) != 1:
            return None
        with self.lock, torch.no_grad():
            logits = self.lm(**enc).logits[0, pos[0]]
        probs = torch.softmax(logits.double(), dim=-1)
        out, resolved = {}, {}
        vocab = self.tok.get_vocab()
        for t in targets:
            forms = variants(self.tok, t)
            resolved[t] = forms
            out[t] = float(sum(probs[vocab[f]] for f in forms))
        return {"model": self.name, "probabilities": out, "resolved_variants": resolved}


def handler(model):
    class H(BaseHTTPRequestHandler):
        def reply(self, code, body):
            data = json.dumps(body).encode()
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_POST(self):
            if self.path.rstrip("/") != "/fill-mask":
                return self.reply(404, {"error": "not_found"})
            req = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            if req.get("model") != model.name:
                return self.reply(400, {"error": "unknown_model", "detail": req.get("model")})
            res = model.fill(req["text"], req["targets"])
            if res is None:
                return self.reply(422, {"error": "mask_tokenization", "detail": req["text"]})
            self.reply(200, res)

        def log_message(self, *args):
            pass

    return H


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", default="roberta-base")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    args = ap.parse_args()
    srv = ThreadingHTTPServer((args.host, args.port), handler(Model(args.model)))
    print(f"serving {args.model} on http://{args.host}:{args.port}", flush=True)
    srv.serve_forever()


if __name__ == "__main__":
    main()

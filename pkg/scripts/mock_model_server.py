#!/usr/bin/env python3
"""Standalone mock chat-completions server for offline pipeline runs.

Echoes the prompt back as the completion (optionally only the text after the
final "Prompt:" marker), so `derivekit collect` can be exercised without
network access or API keys.

    python scripts/mock_model_server.py --port 8077
    DERIVEKIT_API_TOKEN=x derivekit collect --in prompts.jsonl --out done.jsonl \
        --base-url http://127.0.0.1:8077/v1 --model mock
"""
import argparse
import json
from http.server import BaseHTTPRequestHandler, HTTPServer


class EchoHandler(BaseHTTPRequestHandler):
    def log_message(self, fmt, *args):
        print(fmt % args)

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        prompt = body.get("messages", [{}])[0].get("content", "")
        if self.server.tail_only and "Prompt:" in prompt:
            prompt = prompt.rsplit("Prompt:", 1)[1].strip()
        payload = json.dumps(
            {"choices": [{"message": {"role": "assistant", "content": prompt}}]}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8077)
    parser.add_argument("--tail-only", action="store_true",
                        help="echo only the text after the last 'Prompt:'")
    opts = parser.parse_args()
    server = HTTPServer((opts.host, opts.port), EchoHandler)
    server.tail_only = opts.tail_only
    print(f"mock chat-completions endpoint on http://{opts.host}:{opts.port}/v1")
    server.serve_forever()


if __name__ == "__main__":
    main()

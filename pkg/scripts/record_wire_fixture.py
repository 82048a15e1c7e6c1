"""Record one streamed chat completion from a live server as a wire fixture.

The output has the same shape as the files under tests/fixtures/wire, so a
capture from a real vLLM or SGLang deployment can replace the hand-written
ones. Endpoint and key come from BUDGETLAB_ENDPOINT / BUDGETLAB_API_KEY.

    python scripts/record_wire_fixture.py --model Qwen/Qwen3-8B --name live_split \
        --question "What is 6*7?" --max-tokens 64 > tests/fixtures/wire/live_split.json
"""

import argparse
import json
import os
import sys

import httpx

from budgetlab.backend import GenerationRequest, collect
from budgetlab.backend.classify import classify_stream
from budgetlab.backend.openai import encode_request, iter_sse
from budgetlab.prompts import ASSISTANT_SYSTEM


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", required=True)
    ap.add_argument("--name", required=True)
    ap.add_argument("--question", default="What is 6*7?")
    ap.add_argument("--prefix", default="", help="assistant prefix for a continuation capture")
    ap.add_argument("--max-tokens", type=int, default=64)
    ap.add_argument("--temperature", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--stop-on-close", action="store_true")
    ap.add_argument("--no-think", action="store_true")
    args = ap.parse_args()

    url = os.environ.get("BUDGETLAB_ENDPOINT")
    if not url:
        print("BUDGETLAB_ENDPOINT is not set", file=sys.stderr)
        return 3
    spec = {
        "messages": [["system", ASSISTANT_SYSTEM], ["user", args.question]],
        "temperature": args.temperature,
        "max_tokens": args.max_tokens,
        "seed": args.seed,
        "stop_on_think_close": args.stop_on_close,
    }
    if args.prefix:
        spec["assistant_prefix"] = args.prefix
    if args.no_think:
        spec["enable_thinking"] = False
    req = GenerationRequest(**{**spec, "messages": tuple(tuple(m) for m in spec["messages"])})
    body = encode_request(args.model, req)
    headers = {}
    if os.environ.get("BUDGETLAB_API_KEY"):
        headers["Authorization"] = f"Bearer {os.environ['BUDGETLAB_API_KEY']}"
    lines = []
    with httpx.stream("POST", url.rstrip("/") + "/chat/completions", json=body, headers=headers,
                      timeout=600) as response:
        response.raise_for_status()
        for line in response.iter_lines():
            lines.append(line)
    start_in_think = bool(args.prefix) and args.prefix.startswith("<think>") and "</think>" not in args.prefix
    got = collect(classify_stream(iter_sse(lines), start_in_think=start_in_think,
                                  stop_on_think_close=args.stop_on_close))
    fixture = {
        "description": f"live capture {args.name}",
        "request": spec,
        "expected_body": body,
        "sse": lines,
        "expected": {
            "think": got.think_text,
            "answer": got.answer_text,
            "finish": got.finish_reason.value,
            "usage": sum(c.token_count for c in got.chunks),
        },
    }
    json.dump(fixture, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

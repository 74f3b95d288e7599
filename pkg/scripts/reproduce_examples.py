"""Run every bundled example and print the headline numbers.

    python scripts/reproduce_examples.py
"""
from kernelcat.examples import EXAMPLES, run_example


def headline(name, values):
    if name == "urn":
        return [
            f"I(u1|b) = {values['inference']['b']['u1']}, I(u2|b) = {values['inference']['b']['u2']}",
            f"I(u1|r) = {values['inference']['r']['u1']}, I(u2|r) = {values['inference']['r']['u2']}",
            f"Pr(second red | first blue) = {values['prediction']}",
            f"decision: {values['decision']['verdict']}",
        ]
    if name == "cards":
        return [f"Pr(other side red | red showing) = {values['other_side_red']}"]
    if name == "monty":
        post = values["door_given_open_3"]
        return [
            f"opened 3: stay {post['1']}, switch {post['2']}",
            f"recommendation: {values['recommendation_open_3']['verdict']}",
        ]
    if name == "gp-demo":
        post = values["posterior_at_inputs"]
        return [f"posterior sd at inputs: {[round(v ** 0.5, 4) for v in post['var']]}"]
    last = values["trace"][-1]
    return [f"step {last['step']}: mean {last['mean'][0]:.6f}, var {last['cov'][0][0]:.6f}"]


def main():
    for name in EXAMPLES:
        report = run_example(name)
        values = {r["id"]: r.get("value") for r in report["results"]}
        print(f"[{name}]")
        for line in headline(name, values):
            print(f"  {line}")


if __name__ == "__main__":
    main()

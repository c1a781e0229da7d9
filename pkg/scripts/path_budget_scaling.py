"""Time exact path enumeration against branch count and show where the budget falls back.

Each corpus is one API whose native function has ``k`` sequential two-way
branches, one arm calling a guarded helper. The path count grows faster than
2**k because a path may also end inside any helper it enters.

    python scripts/path_budget_scaling.py --max-branches 14 --budget 10000
"""
import argparse
import time
from dataclasses import dataclass

from xlangperm.corpus import corpus_from_sources
from xlangperm.mapping import maximal_paths
from xlangperm.pipeline import extract_from_corpus

JAVA = """package android.s;
public class S {
    public int run(int x) { return native_run(x); }
    private static native int native_run(int x);
}
"""


def native_source(k: int) -> str:
    branches = "".join(
        f"    if (x == {i}) {{\n        guarded{i}();\n    }} else {{\n        x = 0;\n    }}\n" for i in range(k)
    )
    helpers = "".join(
        f"void guarded{i}() {{\n"
        f'    if (!checkCallingPermission(String16("android.permission.P{i}"))) {{\n'
        "        return PERMISSION_DENIED;\n"
        "    }\n"
        "}\n"
        for i in range(k)
    )
    return f"""namespace android {{
static const char* const kClassPathName = "android/s/S";
static const JNINativeMethod gMethods[] = {{
    {{"native_run", "(I)I", (void*)android_s_S_run}},
}};
int android_s_S_run(int x) {{
{branches}    return 0;
}}
{helpers}int register_android_s_S(JNIEnv* env) {{
    return jniRegisterNativeMethods(env, kClassPathName, gMethods, NELEM(gMethods));
}}
}}
"""


@dataclass(frozen=True)
class Scaling:
    max_branches: int = 14
    budget: int = 10_000


def _count(g, api, budget: int) -> str:
    try:
        return str(sum(1 for _ in maximal_paths(g, g.find(api).id, budget)))
    except OverflowError:
        return f">{budget}"


def run(cfg: Scaling) -> None:
    print(f"{'branches':>8} {'paths':>8} {'nodes':>6} {'seconds':>8} approximate")
    for k in range(1, cfg.max_branches + 1):
        corpus = corpus_from_sources({
            "framework/java/android/s/S.mjava": JAVA,
            "framework/native/s/android_s_S.mcpp": native_source(k),
        })
        t0 = time.perf_counter()
        ex = extract_from_corpus(corpus, path_budget=cfg.budget)
        elapsed = time.perf_counter() - t0
        (entry,) = ex.map.entries
        print(f"{k:>8} {_count(ex.cfg, entry.api, cfg.budget):>8} {len(ex.cfg.nodes):>6} {elapsed:>8.3f} {entry.approximate}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-branches", type=int, default=Scaling.max_branches)
    p.add_argument("--budget", type=int, default=Scaling.budget)
    args = p.parse_args()
    run(Scaling(args.max_branches, args.budget))


if __name__ == "__main__":
    main()

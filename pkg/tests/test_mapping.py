import json

import pytest

from xlangperm.conditions import And, Or, permission, pid_self, truth_table, atoms as atoms_of
from xlangperm.corpus import corpus_from_sources
from xlangperm.frontend import MethodRef
from xlangperm.mapping import Origin, ProtectionEntry, ProtectionMap, extract_mappings
from xlangperm.pipeline import extract_from_corpus

import path_oracle
from conftest import extraction

CAMERA = "android.permission.CAMERA"


@pytest.mark.parametrize("name, expected", [
    ("camera_connect_corpus", {"android.hardware.camera2.CameraManager.openCamera/3": Or((permission(CAMERA), pid_self()))}),
    ("radio_corpus", {"android.hardware.radio.RadioModule.RadioModule/3": permission("android.permission.ACCESS_FM_RADIO")}),
    ("media_player_corpus", {"android.media.MediaPlayer.setDataSource/1": permission("android.permission.INTERNET")}),
    ("media_recorder_corpus", {
        "android.media.MediaRecorder.setAudioSource/1": permission("android.permission.RECORD_AUDIO"),
        "android.media.MediaRecorder.setVideoSource/1": permission(CAMERA),
    }),
    ("camera_info_corpus", {}),
    ("media_native_corpus", {}),
    ("checkfree", {}),
])
def test_fixture_maps(name, expected):
    pmap = extraction(name).map
    assert {str(e.api): e.condition for e in pmap.entries} == expected
    assert all(e.origin is Origin.NATIVE and not e.approximate for e in pmap.entries)


def _api_corpus(native_body):
    java = """package android.t;
public class T {
    public int run(int x) { return native_run(x); }
    private static native int native_run(int x);
}
"""
    native = f"""namespace android {{
static const char* const kClassPathName = "android/t/T";
static const JNINativeMethod gMethods[] = {{
    {{"native_run", "(I)I", (void*)android_t_T_run}},
}};
{native_body}int register_android_t_T(JNIEnv* env) {{
    return jniRegisterNativeMethods(env, kClassPathName, gMethods, NELEM(gMethods));
}}
}}
"""
    return corpus_from_sources({
        "framework/java/android/t/T.mjava": java,
        "framework/native/t/android_t_T.mcpp": native,
    })


def _guard(perm):
    return (
        f'    if (!checkCallingPermission(String16("android.permission.{perm}"))) {{\n'
        "        return PERMISSION_DENIED;\n"
        "    }\n"
    )


RUN = MethodRef("android.t.T", "run", 1)


def test_sequential_checks_conjoin():
    ex = extract_from_corpus(_api_corpus(f"int android_t_T_run(int x) {{\n{_guard('A')}{_guard('B')}    return 0;\n}}\n"))
    assert ex.map.get(RUN) == And((permission("android.permission.A"), permission("android.permission.B")))


def test_alternative_branches_disjoin():
    body = (
        "int android_t_T_run(int x) {\n"
        "    if (x == 1) {\n"
        "        a();\n"
        "    } else {\n"
        "        b();\n"
        "    }\n"
        "    return 0;\n"
        "}\n"
        f"void a() {{\n{_guard('A')}}}\n"
        f"void b() {{\n{_guard('B')}}}\n"
    )
    ex = extract_from_corpus(_api_corpus(body))
    assert ex.map.get(RUN) == Or((permission("android.permission.A"), permission("android.permission.B")))


def test_unchecked_bypass_still_reports_checked_paths():
    body = (
        "int android_t_T_run(int x) {\n"
        "    if (x == 1) {\n"
        "        a();\n"
        "    }\n"
        "    return 0;\n"
        "}\n"
        f"void a() {{\n{_guard('A')}}}\n"
    )
    assert extract_from_corpus(_api_corpus(body)).map.get(RUN) == permission("android.permission.A")


def test_path_budget_falls_back_to_approximation():
    branches = "".join(
        f"    if (x == {i}) {{\n        a{i}();\n    }} else {{\n        b{i}();\n    }}\n" for i in range(3)
    )
    helpers = "".join(f"void a{i}() {{\n{_guard(f'A{i}')}}}\nvoid b{i}() {{\n    x = 0;\n}}\n" for i in range(3))
    corpus = _api_corpus(f"int android_t_T_run(int x) {{\n{branches}    return 0;\n}}\n{helpers}")
    exact = extract_from_corpus(corpus).map.entries[0]
    rough = extract_from_corpus(corpus, path_budget=2).map.entries[0]
    assert not exact.approximate and rough.approximate
    assert rough.condition == Or(tuple(permission(f"android.permission.A{i}") for i in range(3)))
    pool = sorted(atoms_of(exact.condition))
    # the approximation only ever weakens the requirement
    for e, r in zip(truth_table(exact.condition, pool), truth_table(rough.condition, pool)):
        assert r or not e


def test_per_path_rows_and_json_round_trip():
    ex = extract_from_corpus(extraction("full_corpus").corpus, per_path=True)
    data = json.loads(json.dumps(ex.map.to_json(per_path=True)))
    assert all(row["paths"] for row in data["entries"])
    for e in ex.map.entries:
        assert all(r.nodes[0] == ex.cfg.find(e.api).id for r in e.witness_paths)
    again = ProtectionMap.from_json(data)
    assert [(e.api, e.condition, e.origin) for e in again.entries] == [(e.api, e.condition, e.origin) for e in ex.map.entries]


def test_map_rejects_duplicate_apis():
    e = ProtectionEntry(RUN, permission("A"), Origin.NATIVE)
    with pytest.raises(ValueError):
        ProtectionMap((e, e))


def test_map_is_sorted_and_without_drops():
    pmap = extraction("full_corpus").map
    names = [str(e.api) for e in pmap.entries]
    assert names == sorted(names)
    first = pmap.entries[0].api
    assert first not in pmap.without(first).apis()


def test_empty_graph_gives_empty_map():
    assert extract_mappings(extraction("checkfree").cfg).entries == ()


def test_matches_brute_force_oracle_on_random_corpora():
    for seed, p, ex in path_oracle.sample_corpora(40):
        for api, (expected, actual) in path_oracle.compare(p, ex.map).items():
            assert expected == actual, (seed, api)

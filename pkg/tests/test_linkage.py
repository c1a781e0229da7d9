import shutil

import pytest

from xlangperm.corpus import corpus_from_sources, load_corpus
from xlangperm.frontend import MethodRef, UNKNOWN
from xlangperm.linkage import (
    ConflictingRegistration, PairKind, find_jni_registrations, jni_arity, link,
)

from conftest import PARTS, load_named


def _link(corpus):
    return link(corpus.units, corpus.symtab)


def test_camera_info_single_aidl_pair():
    result = _link(load_named("camera_info_corpus"))
    (pair,) = result.pairs
    assert pair.kind is PairKind.AIDL
    assert pair.java_method.name == pair.native_method.name == "getCameraInfo"
    assert pair.match_key[:2] == ("ICameraService", "getCameraInfo")
    assert not pair.inner_language


def test_camera_info_without_native_class_has_no_pairs(tmp_path):
    root = tmp_path / "camera_info"
    shutil.copytree(PARTS / "camera_info", root)
    for f in (root / "framework" / "native").rglob("CameraService.mcpp"):
        f.unlink()
    result = _link(load_corpus([root]))
    assert result.pairs == ()
    codes = {(d.code, d.message.split()[0], d.message.split()[1]) for d in result.diagnostics}
    assert ("UNMATCHED", "AIDL", "JAVA") in codes


def test_radio_jni_pair_with_arity_from_signature():
    corpus = load_named("radio_corpus")
    (pair,) = _link(corpus).pairs
    assert pair.kind is PairKind.JNI
    assert pair.java_method == MethodRef("android.hardware.radio.RadioModule", "native_setup", 2)
    assert pair.native_method.name == "android_hardware_Radio_setup"
    (reg,) = find_jni_registrations(corpus.units)
    entry = next(e for e in reg.entries if e.java_name == "native_setup")
    assert jni_arity(entry.signature) == pair.java_method.arity


def test_service_registry_from_add_service():
    corpus = load_named("full_corpus")
    reg = _link(corpus).registry
    assert reg.get("media.camera") == "android.CameraService"
    assert reg.get("media.player") == "android.MediaPlayerService"
    assert reg.get("media.nothing") is UNKNOWN


def test_conflicting_service_registration():
    src = """namespace android {
class A { public: static void instantiate(); };
class B { public: static void instantiate(); };
void A::instantiate() { defaultServiceManager()->addService(String16("svc"), new A()); }
void B::instantiate() { defaultServiceManager()->addService(String16("svc"), new B()); }
}
"""
    corpus = corpus_from_sources({"framework/native/x.mcpp": src})
    with pytest.raises(ConflictingRegistration):
        _link(corpus)


@pytest.mark.parametrize("signature, arity", [
    ("()V", 0),
    ("(I)V", 1),
    ("(J)V", 1),
    ("(IJ)Z", 2),
    ("(Ljava/lang/String;)V", 1),
    ("(Ljava/lang/Object;ILjava/lang/String;)I", 3),
    ("([B)V", 1),
    ("([[ILjava/lang/String;Z)V", 3),
    ("(Ljava/lang/ref/WeakReference;[Landroid/os/Parcel;D)J", 3),
    ("(BCDFIJSZ)V", 8),
])
def test_jni_arity(signature, arity):
    assert jni_arity(signature) == arity


@pytest.mark.parametrize("signature", ["V", "(Q)V", "(Ljava/lang/String)V", "([)V"])
def test_jni_arity_rejects_malformed(signature):
    with pytest.raises(ValueError):
        jni_arity(signature)


def _aidl_corpus(native_impls):
    java = """package android.foo;
interface IFoo {
    int go(int x);
    class Stub extends Binder implements IFoo {
        class Proxy implements IFoo {
            private IBinder mRemote;
            public int go(int x) {
                mRemote.transact(TRANSACTION_go, x, null, 0);
                return 0;
            }
        }
    }
}
"""
    classes = "".join(
        f"class {name} : public BnFoo {{ public: status_t go(int x); }};\n"
        f"status_t {name}::go(int x) {{ return NO_ERROR; }}\n"
        for name in native_impls
    )
    native = f"""namespace android {{
class IFoo {{ public: virtual status_t go(int x); }};
class BnFoo : public IFoo {{ public: virtual status_t onTransact(int code, Parcel data, Parcel reply, int flags); }};
status_t BnFoo::onTransact(int code, Parcel data, Parcel reply, int flags) {{
    switch (code) {{
        case GO: {{
            return go(data.readInt32());
        }}
    }}
    return UNKNOWN_TRANSACTION;
}}
{classes}}}
"""
    return corpus_from_sources({
        "framework/java/android/foo/IFoo.mjava": java,
        "framework/native/foo/Foo.mcpp": native,
    })


def test_aidl_pair_by_dispatcher_family():
    (pair,) = _link(_aidl_corpus(["FooService"])).pairs
    assert pair.native_method == MethodRef("android.FooService", "go", 1)
    assert pair.match_key == ("IFoo", "go", "1")


def test_aidl_ambiguity_extends_key_and_reports():
    result = _link(_aidl_corpus(["FooA", "FooB"]))
    assert sorted(p.native_method.owner for p in result.pairs) == ["android.FooA", "android.FooB"]
    assert all(len(p.match_key) == 4 for p in result.pairs)
    assert any(d.code == "AMBIGUOUS" for d in result.diagnostics)


def test_linkage_is_order_independent():
    corpus = load_named("full_corpus")
    forward = link(corpus.units, corpus.symtab)
    backward = link(tuple(reversed(corpus.units)), corpus.symtab)
    assert forward == backward

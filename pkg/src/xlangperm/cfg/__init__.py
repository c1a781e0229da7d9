"""Cross-language CFG construction and call-target resolution."""
from .graph import (
    CfgBuilder, CfgConfig, CfgEdge, CfgNode, CrossCfg, EdgeKind, Fragment, NodeKey, NodeRole,
    build_cross_cfg, contains_security_check,
)
from .resolve import CallResolver, Evidence, Resolution, TypeBinding

__all__ = [
    "CallResolver", "CfgBuilder", "CfgConfig", "CfgEdge", "CfgNode", "CrossCfg", "EdgeKind",
    "Evidence", "Fragment", "NodeKey", "NodeRole", "Resolution", "TypeBinding",
    "build_cross_cfg", "contains_security_check",
]

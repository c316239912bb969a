from .attention import AttentionReport, attention_report, step_attention, write_attention_csv
from .blocks import FusionAttentionBlock, ResBlock, SelectorBlock, split
from .checkpoint import load_checkpoint, save_checkpoint
from .network import SelectorNet, SelectorNetConfig, StepTrace, build_model, config_with

__all__ = [
    "AttentionReport",
    "attention_report",
    "step_attention",
    "write_attention_csv",
    "FusionAttentionBlock",
    "ResBlock",
    "SelectorBlock",
    "split",
    "load_checkpoint",
    "save_checkpoint",
    "SelectorNet",
    "SelectorNetConfig",
    "StepTrace",
    "build_model",
    "config_with",
]

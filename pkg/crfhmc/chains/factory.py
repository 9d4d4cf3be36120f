from .. import schemas
from ..errors import UnsupportedKindError
from .base import BaseChainModel
from .crf import CrfModel
from .hmc import HmcModel

# 注册所有可用的模型类型
# 键是模型文件中的 kind, 值是模型类
MODEL_MAP = {
    "crf": CrfModel,
    "hmc": HmcModel,
}


def get_model_class(kind: str) -> type[BaseChainModel]:
    """
    根据 kind 返回模型类。

    :raises UnsupportedKindError: 如果 kind 不被支持。
    """
    model_class = MODEL_MAP.get(kind.lower())
    if not model_class:
        raise UnsupportedKindError(f"Model kind '{kind}' is not supported.")
    return model_class


def build_model(doc: schemas.CrfModelFile | schemas.HmcModelFile) -> BaseChainModel:
    """
    模型工厂函数: 由已校验的模型文件文档构造具体模型实例。
    """
    return get_model_class(doc.kind).from_document(doc)

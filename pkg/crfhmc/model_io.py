import hashlib
import json
import logging
from pathlib import Path
from typing import IO, Iterator

from pydantic import TypeAdapter, ValidationError

from . import schemas
from .chains.base import BaseChainModel
from .chains.factory import build_model
from .errors import ModelFileError, UnknownSymbolError
from .tables import Alphabet

logger = logging.getLogger(__name__)

_model_file_adapter = TypeAdapter(schemas.ModelFile)


def _location(loc: tuple) -> str:
    """pydantic 错误位置 -> 'V[0][1][2]' 形式的字段路径。"""
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        elif part in ("crf", "hmc"):
            continue
        else:
            path += f".{part}" if path else str(part)
    return path or "<document>"


def parse_model_document(text: str, source: str = "<string>") -> schemas.CrfModelFile | schemas.HmcModelFile:
    """
    解析模型文件文本。
    JSON 语法错误报告行号与列号, 结构错误报告字段路径。
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(e.msg, f"{source}:{e.lineno}:{e.colno}") from None
    try:
        return _model_file_adapter.validate_python(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ModelFileError(first["msg"], f"{source}: {_location(first['loc'])}") from None


def load_model(path: str | Path) -> BaseChainModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFileError(f"cannot read model file ({e.strerror})", str(path)) from None
    model = build_model(parse_model_document(text, str(path)))
    logger.debug(f"Loaded {model!r} from {path}")
    return model


def dump_document(doc) -> str:
    """确定性的 JSON 输出; 浮点数以 repr 写出, 读回后逐位相同。"""
    return json.dumps(doc.model_dump(mode="python"), indent=2, allow_nan=False) + "\n"


def dump_model(model: BaseChainModel) -> str:
    return dump_document(model.to_document())


def model_digest(doc) -> str:
    canonical = json.dumps(doc.model_dump(mode="python"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def read_sequences(stream: IO[str]) -> Iterator[tuple[int, list[str]]]:
    """
    逐行读取观测序列, 符号以空白分隔。
    空行也会产出 (符号列表为空), 以便输出与输入逐行对齐。
    :return: (行号, 符号列表) 的迭代器。
    """
    for line_no, line in enumerate(stream, start=1):
        yield line_no, line.split()


def encode_sequence(alphabet: Alphabet, tokens: list[str], line_no: int) -> tuple[int, ...]:
    try:
        return alphabet.encode(tokens)
    except UnknownSymbolError as e:
        raise ModelFileError(str(e), f"line {line_no}") from None

import datetime

from sqlalchemy import JSON, Boolean, Column, DateTime, Float, Integer, String

from .config import TIMEZONE
from .database import Base


def get_local_time():
    """获取配置时区的当前时间"""
    return datetime.datetime.now(TIMEZONE)


class VerificationRun(Base):
    """一次 CRF/HMC 后验等价性校验的记录。"""
    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, index=True)
    model_digest = Column(String, index=True, nullable=False)
    n = Column(Integer, nullable=False)
    hidden_size = Column(Integer, nullable=False)
    obs_size = Column(Integer, nullable=False)
    max_discrepancy = Column(Float, nullable=False)
    tolerance = Column(Float, nullable=False)
    passed = Column(Boolean, nullable=False)
    sequences_checked = Column(Integer, nullable=False)
    sampled = Column(Boolean, nullable=False)
    report = Column(JSON, nullable=False)
    timestamp = Column(DateTime(timezone=True), default=get_local_time, nullable=False)

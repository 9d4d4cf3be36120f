from sqlalchemy import desc
from sqlalchemy.ext.asyncio import AsyncSession
from sqlalchemy.future import select

from . import models, schemas

# ====================
# Verification run CRUD
# ====================


async def create_verification_run(db: AsyncSession, model_digest: str, report: schemas.VerificationReport):
    """保存一次校验结果"""
    db_run = models.VerificationRun(
        model_digest=model_digest,
        n=report.n,
        hidden_size=report.hidden_size,
        obs_size=report.obs_size,
        max_discrepancy=report.max_discrepancy,
        tolerance=report.tolerance,
        passed=report.passed,
        sequences_checked=report.sequences_checked,
        sampled=report.sampled,
        report=report.model_dump(mode="json"),
    )
    db.add(db_run)
    await db.commit()
    await db.refresh(db_run)
    return db_run


async def get_verification_run(db: AsyncSession, run_id: int):
    """根据 ID 获取单条校验记录"""
    result = await db.execute(select(models.VerificationRun).filter(models.VerificationRun.id == run_id))
    return result.scalars().first()


async def get_verification_runs(db: AsyncSession, skip: int = 0, limit: int = 100, model_digest: str | None = None):
    """获取校验记录列表, 最新的在前"""
    query = select(models.VerificationRun)
    if model_digest is not None:
        query = query.filter(models.VerificationRun.model_digest == model_digest)
    result = await db.execute(query.order_by(desc(models.VerificationRun.id)).offset(skip).limit(limit))
    return result.scalars().all()

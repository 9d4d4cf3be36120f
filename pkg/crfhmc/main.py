import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from . import config
from .database import create_tables

config.configure_logging(default_level=logging.INFO)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    # 应用启动时创建数据表
    await create_tables()
    logger.info("Verification run tables ready")
    yield


app = FastAPI(
    title="CRF/HMC Equivalence Service",
    description="Convert linear-chain CRFs into posterior-equivalent hidden Markov chains, decode and verify",
    version="0.1.0",
    lifespan=lifespan,
)


@app.get("/")
async def read_root():
    return {"message": "Welcome to the CRF/HMC Equivalence API"}

# 引入 API 路由
from .api import convert, decode, history, verify  # noqa: E402

app.include_router(convert.router, prefix="/api/v1/convert", tags=["Convert"])
app.include_router(decode.router, prefix="/api/v1/decode", tags=["Decode"])
app.include_router(verify.router, prefix="/api/v1/verify", tags=["Verify"])
app.include_router(history.router, prefix="/api/v1/history", tags=["History"])

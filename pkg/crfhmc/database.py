import os

from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import declarative_base
from sqlalchemy.pool import NullPool

from .config import DATA_DIR, DATABASE_URL

# 确保数据目录存在
os.makedirs(DATA_DIR, exist_ok=True)

_is_sqlite = DATABASE_URL.startswith("sqlite")

# 创建异步数据库引擎
# connect_args={"check_same_thread": False} 是 SQLite 特有的配置,
# 允许在 FastAPI 的线程池中访问同一个连接。
# SQLite 不使用连接池: 命令行每次记录都在新的事件循环中运行, 连接不能跨循环复用。
engine = create_async_engine(
    DATABASE_URL,
    connect_args={"check_same_thread": False} if _is_sqlite else {},
    poolclass=NullPool if _is_sqlite else None,
)

# expire_on_commit=False 防止在提交后 ORM 对象过期
AsyncSessionLocal = async_sessionmaker(
    bind=engine, class_=AsyncSession, autoflush=False, expire_on_commit=False
)

Base = declarative_base()


async def create_tables():
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


# 依赖注入函数, 用于在 API 路由中获取数据库会话
async def get_db():
    async with AsyncSessionLocal() as session:
        yield session

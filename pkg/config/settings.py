from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    """应用配置"""

    # 应用基本配置
    APP_NAME: str = "paq"
    VERSION: str = "1.0.0"
    DEBUG: bool = False

    # 日志配置
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"

    # 偏序集配置
    POSET_ENUM_MAX: int = 6            # enumerate_posets 的规模上限
    IMAGES_MAX_POSET: int = 8          # pp_morphic_images 的规模上限

    # 对偶配置
    EPSILON_MAX_POSET: int = 20        # epsilon 接受的偏序集规模上限
    ALGEBRA_MAX_SIZE: int = 4096       # epsilon 生成的上集个数上限
    EMBEDDING_MAX_SIZE: int = 33       # 嵌入搜索只在小代数上运行

    # 搜索预算
    IBM_BUDGET: int = 50_000_000       # evaluate_ibm 最多检查的赋值个数
    SEARCH_BUDGET: int = 5_000_000     # 单次回溯搜索的节点上限
    PAQ_BUDGET: Optional[int] = None   # 设置后同时覆盖上面两项

    # 验证配置
    VERIFY_N_MAX: int = 6
    VERIFY_M_MAX: int = 3
    ARROW_N_MAX: int = 4

    # 并行配置
    JOBS: int = 1

    @property
    def ibm_budget(self) -> int:
        return self.PAQ_BUDGET if self.PAQ_BUDGET is not None else self.IBM_BUDGET

    @property
    def search_budget(self) -> int:
        return self.PAQ_BUDGET if self.PAQ_BUDGET is not None else self.SEARCH_BUDGET

    class Config:
        env_file = ".env"
        case_sensitive = True


# 创建全局设置实例
settings = Settings()

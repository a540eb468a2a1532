from django.contrib import admin
from .models import IdentificationRun

@admin.register(IdentificationRun)
class IdentificationRunAdmin(admin.ModelAdmin):
    list_display = ('name', 'status', 'eta_hat', 'd_hat', 'sample_count', 'created_at')
    list_filter = ('status', 'converged', 'is_active')
    search_fields = ('name',)
    readonly_fields = ('report', 'created_at', 'updated_at')

    def get_queryset(self, request):
        return IdentificationRun.all_objects.all()

"""
URL configuration for the patchtrack project: the admin plus the results browser.
"""
from django.contrib import admin
from django.urls import path
from django.conf import settings
from django.conf.urls.static import static
from tracking import views

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', views.run_list, name='run_list'),
    path('runs/<int:pk>/', views.run_detail, name='run_detail'),
    path('runs/<int:pk>/summary.json', views.run_summary, name='run_summary'),
    path('runs/<int:pk>/delete/', views.run_delete, name='run_delete'),
]

# Previews are served by Django; static files go through whitenoise
urlpatterns += static(settings.MEDIA_URL, document_root=settings.MEDIA_ROOT)
